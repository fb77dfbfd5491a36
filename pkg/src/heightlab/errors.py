"""Exception types shared across heightlab modules."""


class HeightLabError(Exception):
    """Base class for all domain errors raised by heightlab."""


class EmptyDiscretization(HeightLabError):
    pass


class DisconnectedDiscretization(HeightLabError):
    pass


class PointOutsideDomain(HeightLabError):
    pass


class InvalidHeightFunction(HeightLabError):
    pass


class UnsupportedProfile(HeightLabError):
    pass


class DomainNotCellCovered(HeightLabError):
    pass


class NotExtendable(HeightLabError):
    def __init__(self, witness):
        super().__init__(str(witness))
        self.witness = witness


class EmptyCarrier(HeightLabError):
    pass


class InstanceTooLarge(HeightLabError):
    pass


class UnsatisfiableParity(HeightLabError):
    pass


class UnboundedInstance(HeightLabError):
    """Some site has no finite window after constraint propagation."""


class EmptySet(HeightLabError):
    pass


class NoSimplexFits(HeightLabError):
    pass


class Disconnected(HeightLabError):
    pass


class MeshOutsideDomain(HeightLabError):
    pass


class SlopeOutOfRange(HeightLabError):
    pass


class InfeasibleBoundary(HeightLabError):
    pass


class UnsupportedDimension(HeightLabError):
    pass


class CorruptTable(HeightLabError):
    pass
