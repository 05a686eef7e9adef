"""Correlated topic modeling toolkit.

Variational EM for the correlated topic model, an LDA baseline, lasso-based
topic graphs, held-out evaluation instruments, and a corpus-browser export.
"""

from .corpus import (
    BowDocument,
    Corpus,
    Vocabulary,
    build_corpus,
    load_corpus,
    save_corpus,
    tokenize,
)
from .estimation import FitConfig, FitTrace, fit, initialize, m_step
from .evaluation import (
    EvalReport,
    cross_validate,
    expected_hellinger,
    heldout_log_prob,
    predictive_perplexity,
    rank_similar,
)
from .graph import TopicGraph, build_graph, lasso_regress, neighborhoods, standardize
from .inference import (
    elbo,
    infer_document,
    update_lambda,
    update_nu2,
    update_phi,
    update_zeta,
)
from .lda import LdaModel, lda_fit, lda_infer_document
from .model import CtmModel, VariationalState, load_model, save_ctm_model
from .numerics import SpdMatrix, log_sum_exp, lognormal_mean, softmax

__version__ = "0.1.0"
