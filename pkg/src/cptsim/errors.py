"""Exception hierarchy shared by every stage of the toolkit."""


class CPTError(Exception):
    """Base class for all errors raised by cptsim."""


class UnknownMaterial(CPTError, KeyError):
    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(
            f"unknown material {name!r}; available: {', '.join(self.available)}"
        )

    def __str__(self):
        return self.args[0]


class DuplicateName(CPTError, ValueError):
    pass


class InvalidPermittivity(CPTError, ValueError):
    pass


class NonPositiveDimension(CPTError, ValueError):
    pass


class NonPositiveCapacitance(CPTError, ValueError):
    pass


class NonPositiveInput(CPTError, ValueError):
    pass


class MeshBudgetExceeded(CPTError, RuntimeError):
    pass


class SingularSystem(CPTError, RuntimeError):
    pass


class NonConvergedSolve(CPTError, RuntimeError):
    pass


class SignConventionViolation(CPTError, ValueError):
    pass


class DegenerateCoupler(CPTError, ValueError):
    pass


class SingularNetwork(CPTError, RuntimeError):
    pass


class ConfigError(CPTError, ValueError):
    pass


class EmptySweep(CPTError, ValueError):
    pass


class MissingStage(CPTError, ValueError):
    pass
