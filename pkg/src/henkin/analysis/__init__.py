from .similarity import SimilarityReport, similarity_threshold, similar, splits_by, as_template
from .clopen import (ClopenSet, clopen_decomposition, measure, normalize, box_measure, box_meet,
                     factor_measure,
                     evaluate_at, nondegenerate, truncation_total, full_boxes)
from .sprk import RankResult, sprk, check_trace, qf_type, BASE_FAIL, INFINITE, pure_equality_rank
from .twocard import (Term, make_term, parse_terms, load_terms, en_partition, en_related,
                      en_signature, class_bound, gamma_instantiate, check_gamma,
                      splitting_chain_search)
