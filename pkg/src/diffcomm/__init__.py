"""Information-diffusion models and game-theoretic community detection."""

from .baselines import LpaConfig, lpa_detect
from .cascade import CascadeConfig, run_independent_cascade, run_linear_threshold
from .diffusion import (DiffusionResult, DiffusionState, InfoMatrix, ModelConfig, egadm_step,
                        gadm_step, psodm_step, run_diffusion)
from .estimators import DiffusionModel, GIDCommunityDetector, LabelPropagation
from .exceptions import (ConfigError, FormatError, ModeError, ModelMismatchError, ParseError,
                         RangeError, StateError)
from .game import GameConfig, GameResult, GameState, detect_communities, run_game, utility
from .generators import ErConfig, GnConfig, generate_er, generate_gn
from .graph import (CommunityCover, EventStream, Graph, build_event_stream, parse_communities,
                    parse_edge_list, read_communities, read_edge_list)
from .hdf import HdfFunction, Schema, build_random_hdf, example_hdf, score_binary, score_real
from .metrics import fccn, modularity, nmi_overlapping
from .pipeline import ExperimentConfig, ResultRecord, emit_summary, run_pipeline

__version__ = "0.1.0"
