"""Exception types shared across the engine."""


class HetqaError(Exception):
    """Base class for all engine errors."""


class MalformedRecord(HetqaError):
    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class DanglingReference(HetqaError):
    def __init__(self, ref_id: str, context: str = ""):
        msg = f"unknown id {ref_id!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)
        self.ref_id = ref_id


class ParseError(HetqaError):
    def __init__(self, offset: int, expected: str):
        super().__init__(f"at offset {offset}: expected {expected}")
        self.offset = offset
        self.expected = expected


class UnboundProjection(HetqaError):
    def __init__(self, name: str):
        super().__init__(f"projected variable ?{name} does not occur in any pattern")
        self.name = name


class DuplicateId(HetqaError):
    def __init__(self, passage_id: str):
        super().__init__(f"duplicate passage id {passage_id!r}")
        self.passage_id = passage_id


class ProviderUnavailable(HetqaError):
    """A generation or embedding provider could not be reached."""


class DimensionMismatch(HetqaError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected vectors of dimension {expected}, got {got}")
        self.expected = expected
        self.got = got


class ScorerUnavailable(HetqaError):
    """The relevance scorer could not be reached."""


class FixtureMiss(HetqaError):
    def __init__(self, digest: str, excerpt: str):
        super().__init__(f"no scripted response for prompt sha256:{digest} ({excerpt!r}...)")
        self.digest = digest


class NoEntityMatch(HetqaError):
    """Entity linking produced no chosen entity to repair a query with."""


class MissingField(HetqaError):
    def __init__(self, field: str):
        super().__init__(f"completion is missing required field {field!r}")
        self.field = field


class MissingTrace(HetqaError):
    def __init__(self, record_id: str):
        super().__init__(f"no trace supplied for record {record_id!r}")
        self.record_id = record_id


class GenerationLeak(HetqaError):
    """A generated question kept leaking its answer after all retries."""


class DistractorEqualsAnswer(HetqaError):
    """Every sampled distractor normalized to the true answer."""


class CompositionLeak(HetqaError):
    """A composed question contains its bridge or final answer."""


class CircularQuestion(HetqaError):
    """Both single-hop questions are the same question."""


class UnknownRecordId(HetqaError):
    def __init__(self, record_id: str):
        super().__init__(f"verdict references unknown record {record_id!r}")
        self.record_id = record_id
