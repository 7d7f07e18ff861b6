from pyTubal.brp import low_tubal_rank_approx
from pyTubal.cube_io import import_raw, read_cube, write_cube
from pyTubal.denoise import DenoiseConfig, DenoiseResult, denoise, hard_threshold
from pyTubal.factorization import multi_rank, tnn, truncated_tsvd, tsvd, tubal_rank
from pyTubal.noise import NoiseSpec, case_preset, planted_cube, synthesize
from pyTubal.stats.quality import QualityReport, evaluate
from pyTubal.structures.cube import Cube, SpectralCube
from pyTubal.tproduct import dft_tubes, idft_tubes, tinverse, tprod, ttranspose
