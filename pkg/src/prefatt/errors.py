"""Exception types shared across the toolkit."""


class PrefattError(Exception):
    """Base class for all toolkit errors."""


class RuleViolationError(PrefattError):
    """An attachment rule breaks positivity or the admissibility envelope."""

    def __init__(self, k: int, value: float, bound: float):
        self.k = k
        self.value = value
        self.bound = bound
        super().__init__(
            f"rule violates admissibility at k={k}: f(k)={value!r}, "
            f"allowed range (0, {bound!r}]"
        )


class TruncationFailureError(PrefattError):
    """The limit-law tail did not drop below the target mass within the cap."""


class ToleranceNotMetError(PrefattError):
    """A certified error bound exceeds the requested tolerance."""


class TailUnderflowError(PrefattError):
    """A tail mass is too small for reliable 64-bit ratio arithmetic."""


class RegimeMismatchError(PrefattError):
    """A rate regime was requested that the rule's classification rules out."""


class NotUnimodalError(PrefattError):
    """A defect-table row changes direction more than once beyond tolerance."""

    def __init__(self, ell: int, k: int):
        self.ell = ell
        self.k = k
        super().__init__(f"row {ell} is not unimodal: second sign change at k={k}")


class PropertyViolationError(PrefattError):
    """A structural property of the defect table failed a sign test."""

    def __init__(self, which: str, k: int, ell: int, detail: str = ""):
        self.which = which
        self.k = k
        self.ell = ell
        super().__init__(f"property {which} violated at (k={k}, ell={ell}) {detail}")


class ParamOutOfRangeError(PrefattError):
    """A model or operation parameter lies outside its documented range."""
