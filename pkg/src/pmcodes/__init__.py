"""Product-matrix regenerating codes over prime fields.

Exact-repair MBR and MSR codes, the MISER code, a generic systematizer,
a share file format for striping byte payloads, and a small cluster
simulator.
"""

from .code_core import Codec, CodeParams, check_feasible, cutset_B, cutset_table, derive_params, repair_bandwidth
from .codecs import build_codec, codec_for
from .errors import *  # noqa: F401,F403
from .ffield import FieldCtx, FieldElement, default_field_size, field_new, is_prime, smallest_valid_prime
from .matfq import MatrixFq, invert, rank, solve, verify_mbr_psi, verify_msr_psi
from .miser import MiserCodec, miser_build, miser_codec, miser_extend
from .pm_mbr import MbrCodec, mbr_build, mbr_build_systematic, mbr_codec
from .pm_msr import MsrCodec, msr_build, msr_codec, msr_ia_witness, msr_systematic_remap
from .simnet import Cluster, SimConfig, SimReport, load_config, parse_config, sim_metrics, sim_run
from .stripe_io import RepairSymbol, Share, helper_stream, stripe_decode, stripe_encode_file, stripe_repair
from .systematizer import GeneratorMatrix, RemappedCodec, check_equivalence, extract_generator, make_systematic

__version__ = "0.1.0"
