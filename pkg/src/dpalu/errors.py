"""Exception types shared across the package."""


class DpaluError(Exception):
    pass


class LengthMismatch(DpaluError, ValueError):
    pass


class Uncorrectable(DpaluError):
    """The received word is farther than the code's radius from any codeword."""


class TooLarge(DpaluError, ValueError):
    pass


class MissingInput(DpaluError, KeyError):
    pass


class WidthMismatch(DpaluError, ValueError):
    pass


class UnknownGate(DpaluError, KeyError):
    pass


class NetlistError(DpaluError, ValueError):
    """Structurally invalid netlist (cycle, dangling reference, bad arity)."""


class ParseError(NetlistError):
    pass


class UnsupportedCode(DpaluError, ValueError):
    pass


class UnsupportedOp(DpaluError, ValueError):
    pass


class IncompleteOpTable(DpaluError, ValueError):
    pass


class EvenLength(DpaluError, ValueError):
    pass


class BoundExceeded(DpaluError, ValueError):
    pass


class ConfigError(DpaluError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ZeroInverse(DpaluError, ZeroDivisionError):
    pass
