"""Timely tracking of a partially observed joint Markov source.

Belief calculus over (state, AoII), MAP estimation over a delayed erasure
channel, and sensor-scheduling policies from round-robin to learned-terminal
MPC, with a Monte-Carlo harness for the two benchmark scenarios.
"""

from .source import (ChannelModel, ComponentSpec, JointSourceModel, Observation, ERASED,
                     build_joint_space, consistent, project, step_source, transmit,
                     load_model, save_model)
from .belief import (Belief, ImpossibleObservation, SuccessorSet, expected_cost,
                     initial_belief, map_estimate, observation_posterior, propagate,
                     successors)
from .policies import LookaheadConfig, lookahead_cost, mpc_action, make_policy
from .scenarios import build_scenario_fire, build_scenario_grid
from .sim import EpisodeConfig, PolicySpec, run_batch, run_episode
from .valuenet import ValueNet, init_net, load_net, save_net, train_batch
from .rlmpc import RlMpcConfig, train_rl_mpc

__version__ = "0.1.0"
