"""kgalign: align natural-language queries with relevant subgraphs of a
commonsense knowledge graph.

The package covers the full alignment pipeline: graph ingestion and indexing
(kgstore), concept linking (linker), hop-capped path retrieval (pathfinder),
similarity pruning and linearization (pruner), generated-path clients
(generator), quality auditing (quality), dataset tooling (corpus) and the
batch/service front ends (cli, service).
"""

__version__ = "0.1.0"

from .kgstore import (  # noqa: F401
    ConceptId,
    IngestReport,
    KnowledgeGraph,
    RelationType,
    TextTriple,
    Triple,
    ingest,
    load_index,
    lookup_exact,
    neighbors,
    normalize_label,
    read_dump,
    save_index,
)
from .linker import (  # noqa: F401
    AlignmentQuery,
    ConceptSet,
    build_query,
    lemmatize,
    link_basic,
    link_enhanced,
)
from .pathfinder import (  # noqa: F401
    KERNEL_NAME,
    Path,
    PathQueryConfig,
    Subgraph,
    find_paths,
    shortest_path,
    subgraph_from_paths,
    to_undirected,
)
from .pruner import (  # noqa: F401
    EmbeddingVector,
    HashedNgramEmbedder,
    LinearizedGraph,
    ProviderError,
    RemoteEmbedder,
    cosine,
    embed,
    linearize,
    prune,
)
