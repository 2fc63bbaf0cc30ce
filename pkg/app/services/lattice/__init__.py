from .graph import (
    Bond,
    LatticeGraph,
    add_uniform_shift,
    average_condition,
    is_mirror_symmetric,
    join,
    mirror_reflect,
    passive_shift,
    reversal_permutation,
    to_matrix,
)
from .builders import build_lieb_tail, build_reservoir, build_ssh, build_three_site_tail, zero_space
from .presets import ConfigPreset, LatticeFamily, PhysicalParameters, Variant, preset_for
