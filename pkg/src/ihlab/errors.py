"""Exception hierarchy shared by all ihlab modules."""


class IhlabError(Exception):
    """Base class for all errors raised by ihlab."""


class InputError(IhlabError):
    """Malformed input: dimension mismatches, unparsable files, bad flags."""


class PreconditionError(InputError):
    """An operation was called with arguments violating its contract
    (zero class, non-isotropic class, non-Lefschetz class, ...)."""


class StructuralError(IhlabError):
    """A model fails a structural requirement discovered during computation,
    e.g. an ill-defined bigrading in a named degree."""


class ConstructionError(IhlabError):
    """Model construction could not be completed or certified."""


class ArithmeticObstruction(IhlabError):
    """Exact arithmetic over the rationals hit an obstruction, e.g. no
    rational isotropic vector was found within the sampling budget."""
