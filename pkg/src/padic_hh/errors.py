"""Exception types raised across the package."""


class PadicHHError(Exception):
    """Base class for all errors raised by padic_hh."""


class MultiTermPower(PadicHHError):
    """A fractional power of a genuine sum was requested."""


class PrecisionExhausted(PadicHHError):
    """Interval refinement hit the bit budget without deciding a sign."""


class DivergentIntegral(PadicHHError):
    def __init__(self, side, detail=""):
        self.side = side
        super().__init__(f"integral diverges on the {side} side{': ' + detail if detail else ''}")


class DivergentNorm(DivergentIntegral):
    pass


class DivergentMass(DivergentIntegral):
    pass


class UnboundedSup(PadicHHError):
    pass


class IncompatibleTails(PadicHHError):
    pass


class NotSupported(PadicHHError):
    """Function does not vanish outside the requested ball."""


class NormTooLarge(PadicHHError):
    pass


class DivergentOperator(PadicHHError):
    def __init__(self, side, detail=""):
        self.side = side
        super().__init__(f"operator series diverges ({side}){': ' + detail if detail else ''}")


class NoClosedForm(PadicHHError):
    pass


class Inadmissible(PadicHHError):
    def __init__(self, window, witness):
        self.window = window
        self.witness = witness
        super().__init__(f"parameters violate {window}; divergence witness: {witness}")
