"""Random-projection locality-sensitive hashing for approximate nearest neighbors."""

from rplsh.dataset import Dataset, DatasetError, generate_synthetic, load_csv, write_csv
from rplsh.evaluation import (
    BenchRecord,
    Experiment,
    monotonicity_accuracy,
    recall_at_k,
    run_benchmark,
)
from rplsh.lsh import (
    CandidateList,
    IndexParams,
    LshIndex,
    ProjectionSet,
    Provenance,
    RankSpace,
    build_index,
    decode_key,
    encode_key,
    generate_projections,
    project,
    query,
    set_projections,
    signature,
)
from rplsh.oracle import ExactResult, euclidean, knn_exact
from rplsh.persistence import IndexFormatError, load_dataset, load_index, save_dataset, save_index

__version__ = "0.1.0"
