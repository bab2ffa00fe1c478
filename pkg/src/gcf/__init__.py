"""Graph convolution fabric.

Infer a graph from training signals, discover its translation structure, and
compile that structure into convolution weight-sharing schemes, stride plans,
and data augmentation operators, all exportable as plain files and verifiable
against exact grid references.
"""

from .augment import AugmentationSpec, augment_dataset, translate_signal
from .downscale import DownscalePlan, chain, induce_translations, make_plan, select_kept
from .errors import GcfError, InputError, InternalError, ValidationError
from .graph import (Graph, connected_components, grid_graph, induced_subgraph,
                    load_graph, neighborhood, save_graph)
from .inference import covariance_matrix, knn_covariance_graph
from .propagate import (KernelIndexing, ProxyFamily, family_as_maps,
                        load_family, propagate, save_family, seed_kernel)
from .scheme import (ConvLayerParams, ConvScheme, compile_scheme, forward,
                     load_scheme, save_scheme, scheme_stats)
from .translate import (LocalTranslationSet, PartialMap, enumerate_translations,
                        find_all_local_translations, find_local_translations,
                        is_candidate_translation)

__version__ = "0.1.0"
