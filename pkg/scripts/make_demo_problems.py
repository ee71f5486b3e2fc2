#!/usr/bin/env python3
"""Generate small demo problem files for the command-line tools.

Writes four problems into demo/ (or --out DIR):
  stable_quadratic.json      definite quadratic, verdict Stable
  unstable_slide.json        Hessian kernel along a singular-value slide
  inconclusive_split.json    degenerate group split by Gamma, sandwich fails
  stable_least_squares.json  least-squares theta, verdict Stable
"""
import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from kyfan_tilt.io import matrix_to_json, vec, unvec  # noqa: E402


def quadratic_problem(X, Gamma, kappa, Q, nu=1.0):
    n, m = X.shape
    L = -unvec(Q @ vec(X), n, m) - Gamma / nu
    return {
        "n": n,
        "m": m,
        "kappa": kappa,
        "nu": nu,
        "X": matrix_to_json(X),
        "theta": {"type": "quadratic", "Q": matrix_to_json(Q), "L": matrix_to_json(L)},
    }


def projector_complement(W):
    w = vec(W)
    w = w / np.linalg.norm(w)
    return np.eye(len(w)) - np.outer(w, w)


def least_squares_problem(X, Gamma, kappa, rng, nu=1.0):
    # b chosen so the residual gradient at X equals -Gamma/nu exactly
    n, m = X.shape
    A = rng.standard_normal((n * m + 5, n * m))
    s = A @ np.linalg.solve(A.T @ A, vec(Gamma) / nu)
    b = A @ vec(X) + s
    return {
        "n": n,
        "m": m,
        "kappa": kappa,
        "nu": nu,
        "X": matrix_to_json(X),
        "theta": {"type": "least_squares", "A": matrix_to_json(A), "b": [float(v) for v in b]},
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "demo"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)

    X3 = np.diag([3.0, 2.0, 1.0])
    G3 = np.diag([1.0, 1.0, 0.0])
    problems = {}

    problems["stable_quadratic.json"] = quadratic_problem(X3, G3, 2, np.eye(9))

    W = np.zeros((3, 3))
    W[1, 1] = 1.0
    problems["unstable_slide.json"] = quadratic_problem(X3, G3, 2, projector_complement(W))

    X6 = np.diag([3.0, 2.0, 2.0, 2.0, 2.0, 1.0])
    G6 = np.diag([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    Wi = np.zeros((6, 6))
    Wi[2, 2] = 1.0
    Wi[3, 3] = Wi[4, 4] = 0.5
    problems["inconclusive_split.json"] = quadratic_problem(X6, G6, 3, projector_complement(Wi))

    problems["stable_least_squares.json"] = least_squares_problem(X3, G3, 2, rng)

    print("=" * 60)
    print("demo problem generator")
    print("=" * 60)
    for name, prob in problems.items():
        path = os.path.join(args.out, name)
        with open(path, "w") as fh:
            json.dump(prob, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"  wrote {path}  (n={prob['n']}, m={prob['m']}, kappa={prob['kappa']})")
    print("try:  kyfan-tilt analyze demo/unstable_slide.json")


if __name__ == "__main__":
    main()
