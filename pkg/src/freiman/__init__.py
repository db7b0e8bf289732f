"""Freiman homomorphisms on subsets of finite Abelian groups."""

from .connectivity import (ConnectivityResult, IsolationWitness, Verdict, extension_property_exact,
                           has_extension_property, is_additively_connected, is_isolated_subset,
                           propagate_affine, sumset_vvv)
from .diagnostics import (DiagnosticsReport, M_value, M_value_orbits, diagnostics_report, l12_fourier,
                          max_pair_representation, sup_mu3_deviation, triple_conv_range, u2_energy)
from .estimators import AffineExtractor, FreimanAnalyzer
from .fuzzy import (FuzzyDist, FuzzyMap, build_psi, build_theta, char_measure, extract_affine,
                    extract_gamma, extraction_report)
from .groups import GroupSpec
from .homs import (AffineMap, HomSpace, all_affine_maps, build_relations, find_nonaffine_hom,
                   freiman_dimension, hom_space, homs_to_cyclic, is_affine, is_freiman_hom,
                   is_universally_rigid)
from .quadruples import (IncrementalQuadruples, QuadrupleSet, SubsetSample, brute_force_quadruples,
                         derive_seed, enumerate_quadruples, isolated_elements, sample_binomial,
                         sample_fixed)

__version__ = "0.1.0"
