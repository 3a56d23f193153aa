"""Engine for aligning variant editions of a text tradition line by line.

Word embeddings are trained on the corpus at hand, lines are compared with
exact word mover's distance, and a domain expert's ratings and drag edits
iteratively reshape the embedding space and with it the alignment.
"""

from .aligner import AlignerConfig, AlignmentDiff, AlignmentPair, AlignmentSet, Bin, align, diff
from .corpus import Corpus, Edition, Line, Vocabulary, build_vocabulary, normalize_token
from .embedding import (
    CooccurrenceMatrix,
    EmbeddingState,
    build_cooccurrence,
    compute_ppmi,
    cosine,
    factorize,
    nearest_neighbors,
    train,
)
from .feedback import DragEvent, FeedbackConfig, RatingEvent, apply_drag, apply_rating, replay
from .transport import (
    BagOfWords,
    TransportPlan,
    ground_distance,
    nbow,
    pair_heatmap,
    relaxed_lower_bound,
    similarity,
    wmd,
)

__version__ = "0.1.0"
