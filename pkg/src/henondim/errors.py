"""Exception types.  Every error carries a short machine-readable ``tag``."""


class HenonDimError(Exception):
    tag = "error"

    def __init__(self, message="", **context):
        self.context = context
        super().__init__(message)

    def __str__(self):
        text = f"[{self.tag}] {self.args[0]}" if self.args and self.args[0] else f"[{self.tag}]"
        if self.context:
            text += " (" + ", ".join(f"{k}={v}" for k, v in self.context.items()) + ")"
        return text

    def __reduce__(self):
        return self.__class__, (self.args[0] if self.args else "",), {"context": self.context}


class EscapedError(HenonDimError):
    tag = "escaped"


class OrientationError(HenonDimError):
    tag = "orientation"


class ConfigError(HenonDimError):
    tag = "config"


class SeedingDivergedError(HenonDimError):
    tag = "seeding-diverged"


class NewtonDivergedError(HenonDimError):
    tag = "newton-diverged"


class NonHyperbolicError(HenonDimError):
    tag = "non-hyperbolic"


class IncompleteLibraryError(HenonDimError):
    tag = "incomplete-library"


class FingerprintMismatchError(HenonDimError):
    tag = "fingerprint-mismatch"


class CorruptCacheError(HenonDimError):
    tag = "corrupt-cache"


class DegenerateLambdaError(HenonDimError):
    tag = "degenerate-Lambda"


class NoBracketError(HenonDimError):
    tag = "no-bracket"


class NoInteriorMaxError(HenonDimError):
    tag = "no-interior-max"


class BudgetExceededError(HenonDimError):
    tag = "budget-exceeded"
