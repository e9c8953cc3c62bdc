"""Shared glue for the small semidefinite feasibility problems."""

import cvxpy as cp


class SolverInconclusive(RuntimeError):
    """The SDP solver neither certified feasibility nor infeasibility."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


def pick_solver(solver=None):
    if solver is not None:
        return solver
    installed = cp.installed_solvers()
    for name in ("CLARABEL", "SCS", "CVXOPT"):
        if name in installed:
            return name
    raise SolverInconclusive("no usable SDP solver installed")
