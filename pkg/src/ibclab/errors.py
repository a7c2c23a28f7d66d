"""Exception and warning types.

Hard failures derive from ``IBCError``. Conditions where a result is still
meaningful (a solver that ran out of steps, a formula evaluated outside its
asymptotic regime) are warnings, and the result object carries a flag too.
"""


class IBCError(Exception):
    pass


class SymmetryViolation(IBCError):
    """The operator failed a symmetry probe or produced Arnoldi couplings."""


class ZeroRhs(IBCError, ValueError):
    pass


class UnsupportedClass(IBCError, ValueError):
    pass


class UnsolvableClass(IBCError, ValueError):
    """Smoothness too low: the worst-case complexity is infinite."""


class FullKrylov(IBCError):
    """Krylov span already fills the space; no hidden direction is left."""


class InvalidSpec(IBCError, ValueError):
    pass


class IoFailure(IBCError, OSError):
    pass


class NotConverged(UserWarning):
    pass


class RegimeViolation(UserWarning):
    pass


class DegenerateKrylov(UserWarning):
    pass


class ClassPromiseUnchecked(UserWarning):
    pass


class BreakdownAtStep(UserWarning):
    pass
