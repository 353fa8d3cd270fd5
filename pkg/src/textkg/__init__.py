"""textkg: turn plain-text documents into a knowledge graph.

The pipeline prompts a chat model (or a scripted fixture backend) to extract
entities and triplets, resolves co-referent entities and predicates with
weighted string/embedding similarity, induces a type taxonomy bottom-up, and
computes quality metrics from human annotations.
"""

from .chunking import Chunk, SplitConfig, reassemble, rolling_summary, split
from .errors import (
    AnnotationConflictError,
    RecordValidationError,
    ReferentialIntegrityError,
    StageError,
    TextKGError,
    TokenBudgetError,
    TransportError,
    UnscriptedPromptError,
)
from .evaluation import (
    Annotation,
    GroundTruth,
    MetricsReport,
    compute_report,
    f1_score,
    inferred_share,
    precision,
    qualifying_types,
    recall,
)
from .extraction import Extractor, merge_fragments
from .gateway import (
    BackendConfig,
    ChatMessage,
    CompletionRequest,
    FixtureBackend,
    RemoteChatBackend,
    RetryPolicy,
    build_backend,
    request_digest,
    whitespace_token_count,
    write_fixture_file,
)
from .model import (
    CANDIDATE,
    RESOLVED,
    EntityRecord,
    KnowledgeGraph,
    PredicateRecord,
    ProvenanceRef,
    TripletRecord,
    entity_content_id,
    predicate_content_id,
)
from .pipeline import Pipeline, PipelineConfig, StageArtifact, ingest
from .prompts import PromptTemplate, TemplateSet, numbered_list, validated_completion
from .resolution import Cluster, EquivalenceGroup, Resolver, build_clusters
from .schema import (
    HypernymEntry,
    SchemaEdge,
    SchemaGraph,
    SchemaNode,
    agglomerate,
    collect_types,
    generate_hypernyms,
    infer_schema,
)
from .serialize import (
    BASE_NAMESPACE,
    document_to_graph,
    export_graph,
    graph_to_document,
    graph_to_ntriples,
    import_graph,
)
from .similarity import (
    EmbeddingProvider,
    HashedTrigramEmbedder,
    RemoteEmbeddingProvider,
    SimilarityWeights,
    Thresholds,
    cosine,
    description_similarity,
    entity_pair_admitted,
    entity_score,
    label_similarity,
    levenshtein,
    predicate_pair_admitted,
    predicate_score,
    similar_entities,
    similar_predicates,
    type_similarity,
)
from .validation import (
    CONSISTENCY_VIOLATION,
    PATTERN_MISMATCH,
    ParsedLine,
    ValidationReport,
    validate_response,
)

__version__ = "0.1.0"
