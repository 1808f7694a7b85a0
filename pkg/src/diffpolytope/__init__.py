"""Polytopes of diffusion matrices compatible with stationary graph signals.

Given signals obtained by diffusing i.i.d. sources on an unknown graph, every
admissible diffusion matrix shares the eigenvectors of the signal covariance;
its eigenvalues range over a convex polytope. This package builds that
polytope, selects points from it by linear programming (minimum trace or
minimum entry sum), projects external candidate matrices onto it, and runs
the accompanying synthetic experiments.
"""
from .errors import (DiffPolytopeError, GenerationFailed, Infeasible, InvalidInput, IsolatedVertex,
                     NonConvergence, NumericalFailure, Undefined)
from .graphs import diffusion_operator, erdos_renyi, random_geometric, ring, uniform_dense
from .matcore import Eigenbasis, eig_sym
from .metrics import diff_simple, diff_sparse, edge_score, mepre, repre
from .polytope import build_constraints, is_member, reconstruct
from .selection import hypothesis_test, project_candidate, rank_candidates, solve_simple, solve_sparse
from .signals import generate_observations, sample_covariance, stream_covariance

__version__ = "0.1.0"
