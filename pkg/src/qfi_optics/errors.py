"""Exception hierarchy shared by the library and the command line."""


class QfiOpticsError(Exception):
    """Base class for every error raised by qfi_optics."""

    exit_code: int = 4


class InputError(QfiOpticsError, ValueError):
    """User supplied data violates a schema or a precondition."""

    exit_code = 2


class IndexRangeError(InputError, IndexError):
    """Loss-event indices outside 0 <= l_a <= k <= N, 0 <= l_b <= N - k."""


class DimensionError(InputError):
    """Problem size exceeds the validated range of an exact enumeration."""


class PovmError(InputError):
    """Measurement elements do not resolve the identity."""


class BoundarySingularityError(QfiOpticsError, ArithmeticError):
    """A ratio term of the Fisher-information bound is 0/0 at the evaluation point."""

    def __init__(self, branches: list[int]) -> None:
        self.branches = branches
        super().__init__(
            f"0/0 ratio term in {len(branches)} loss branch(es); "
            "evaluate at an interior point or request one-sided limits"
        )


class CertificationError(QfiOpticsError):
    """A numerical result could not be certified (KKT, curvature or root bracketing)."""

    exit_code = 3
