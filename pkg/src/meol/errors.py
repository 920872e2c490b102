"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class MeolError(Exception):
    """Base class for all toolkit errors."""


# --- SVG handling ---------------------------------------------------------

class MalformedXml(MeolError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class NotAnSvg(MeolError):
    pass


class DuplicateId(MeolError):
    def __init__(self, id_value: str, first_path: list[int], second_path: list[int]):
        super().__init__(
            f"duplicate id {id_value!r} at paths {first_path} and {second_path}"
        )
        self.id_value = id_value
        self.first_path = first_path
        self.second_path = second_path


class RenderUnsupported(MeolError):
    def __init__(self, feature: str, node_path: list[int]):
        super().__init__(f"cannot render {feature} (element path {node_path})")
        self.feature = feature
        self.node_path = node_path


class DimensionMismatch(MeolError):
    pass


# --- Rewrite plans --------------------------------------------------------

class SvgTooLong(MeolError):
    def __init__(self, length: int, budget: int):
        super().__init__(f"serialized SVG is {length} chars, budget is {budget}")
        self.length = length
        self.budget = budget


class PlanParseError(MeolError):
    pass


class SelectorUnresolved(MeolError):
    def __init__(self, selector: str):
        super().__init__(f"selector {selector!r} does not resolve to a node")
        self.selector = selector


class IdCollision(MeolError):
    def __init__(self, new_id: str):
        super().__init__(f"id {new_id!r} already used elsewhere in the document")
        self.new_id = new_id


# --- Prompts and embedding ------------------------------------------------

class ModalityMismatch(MeolError):
    pass


class ZeroVector(MeolError):
    pass


class NonFiniteVector(MeolError):
    pass


class BackendUnavailable(MeolError):
    pass


class BackendRejected(MeolError):
    pass


# --- Wire protocol --------------------------------------------------------

class ProtocolError(MeolError):
    pass


# --- Retrieval ------------------------------------------------------------

class DimMismatch(MeolError):
    pass


class DuplicateItem(MeolError):
    pass


class UnknownGroundTruth(MeolError):
    pass


class TooFewItems(MeolError):
    pass


# --- Benchmark ------------------------------------------------------------

class FileUnreadable(MeolError):
    pass


class EmptyDataset(MeolError):
    pass
