"""Exception hierarchy. Every error raised on purpose derives from ParamStabError."""


class ParamStabError(Exception):
    pass


# linalg
class NotSpdError(ParamStabError):
    """Mass matrix is not symmetric positive definite."""


class SingularMatrixError(ParamStabError):
    pass


class NoConvergenceError(ParamStabError):
    pass


class DefectivePencilError(ParamStabError):
    """Eigenvalues are repeated or the pencil is (nearly) defective."""


class DegreeZeroError(ParamStabError):
    pass


# spectral
class AtPoleError(ParamStabError):
    pass


class QuadratureFailureError(ParamStabError):
    pass


# charfun
class NearEigenvalueError(ParamStabError):
    """The resolvent is numerically singular at the requested point."""


class DegenerateModeError(ParamStabError):
    """f_A'(sigma_p) vanishes, so the mode has no usable rank-one weight."""


class SeedExhaustedError(ParamStabError):
    def __init__(self, msg, roots=None):
        super().__init__(msg)
        self.roots = roots


class BranchCutError(ParamStabError):
    pass


# stability
class ResonantArgumentError(ParamStabError):
    pass


class ResonantPoleError(ParamStabError):
    pass


class UnstableBaseError(ParamStabError):
    pass


# models
class RankDeficientConstraintError(ParamStabError):
    pass


class ConfigError(ParamStabError):
    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field


class NearResonanceWarning(UserWarning):
    """A pole of G lands close to a zero of f_A or to an eigenvalue difference."""
