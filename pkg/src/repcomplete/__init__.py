"""Learning token repetition for Java code completion.

Java methods are linearized into AST token streams, an LSTM language model
is trained on them, and pointer heads learn to copy identifiers that
already appeared in the recent context.
"""

from .config import RunConfig, load_config
from .corpus import SplitCorpus, Vocabulary, build_vocab, context_window, split_corpus
from .errors import ConfigError, DataError, NumericError, ReproError
from .evaluation import EvalReport, Predictor, compare_models, evaluate
from .models import (
    AttenPtrHead,
    ContextStates,
    LanguageModel,
    RepHeadSet,
    atten_ptr_forward,
    mix_distributions,
    rep_argmax,
    rep_decision,
    rep_pointer_probs,
    route_head,
)
from .numeric import Tensor, clip_gradients, grad_check, softmax_cross_entropy, stable_softmax
from .pipeline import Workspace
from .syntax import Function, classify, linearize, parse_java, repetition_stats, resolve_variables
from .training import TrainConfig, train_lm, train_ptr, train_rep

__version__ = "0.1.0"
