"""Node scoring: PageRank against a dense solve, degree, external files."""

import numpy as np
import pytest

from molmask import (
    NonFiniteScore,
    ShapeMismatch,
    degree_scores,
    load_external_scores,
    pagerank,
    parse_smiles,
)



def dense_pagerank(graph, alpha=0.85):
    """Direct linear solve of (I - alpha A D^-1) x = (1 - alpha) p."""
    n = graph.n_atoms
    if n == 1:
        return np.array([1.0])
    adj = np.zeros((n, n))
    for b in graph.bonds:
        adj[b.u, b.v] = adj[b.v, b.u] = 1.0
    walk = adj / adj.sum(axis=0)[np.newaxis, :]
    p = np.full(n, 1.0 / n)
    x = np.linalg.solve(np.eye(n) - alpha * walk, (1.0 - alpha) * p)
    return x / x.sum()


class TestPagerank:
    def test_three_node_path(self):
        # Hand solution of the linear system: ends 19/74, middle 18/37.
        scores = pagerank(parse_smiles("CCO"))
        np.testing.assert_allclose(
            scores.as_array(), [19 / 74, 36 / 74, 19 / 74], atol=1e-8
        )

    def test_matches_dense_solve_on_fixtures(self, fixture_graphs):
        checked = 0
        for g in fixture_graphs:
            if g.n_atoms > 12:
                continue
            expected = dense_pagerank(g)
            got = pagerank(g).as_array()
            np.testing.assert_allclose(got, expected, atol=1e-7, err_msg=g.source_smiles)
            checked += 1
        assert checked >= 15

    def test_probability_vector(self, fixture_graphs):
        for g in fixture_graphs:
            scores = pagerank(g)
            arr = scores.as_array()
            assert np.all(arr > 0)
            np.testing.assert_allclose(arr.sum(), 1.0, atol=1e-12)
            assert scores.converged
            assert scores.source == "pagerank"

    def test_symmetry_on_benzene(self):
        arr = pagerank(parse_smiles("c1ccccc1")).as_array()
        np.testing.assert_allclose(arr, np.full(6, 1 / 6), atol=1e-9)

    def test_star_center_dominates(self):
        g = parse_smiles("CC(C)(C)C")
        arr = pagerank(g).as_array()
        assert arr[1] == arr.max()
        assert np.all(arr[1] > np.delete(arr, 1))

    def test_single_atom(self):
        scores = pagerank(parse_smiles("C"))
        assert scores.values == (1.0,)
        assert scores.converged

    def test_iteration_budget(self):
        # One iteration cannot converge on an asymmetric graph; the
        # result must still come back, flagged unconverged.
        scores = pagerank(parse_smiles("CCO"), max_iter=1)
        assert not scores.converged
        assert scores.iterations == 1
        np.testing.assert_allclose(scores.as_array().sum(), 1.0, atol=1e-12)

    def test_alpha_zero_is_uniform(self):
        arr = pagerank(parse_smiles("CC(C)O"), alpha=0.0).as_array()
        np.testing.assert_allclose(arr, np.full(4, 0.25), atol=1e-12)


class TestDegreeScores:
    def test_values(self):
        g = parse_smiles("CC(C)(C)C")
        assert degree_scores(g).values == (1.0, 4.0, 1.0, 1.0, 1.0)
        assert degree_scores(g).source == "degree"


class TestExternalScores:
    def _write(self, path, rows):
        with open(path, "w") as handle:
            for row in rows:
                handle.write(",".join(str(v) for v in row) + "\n")

    def test_round_trip(self, tmp_path):
        path = tmp_path / "scores.csv"
        self._write(path, [[0.5, 1.5, 2.5], [3.0, 4.0]])
        scores = load_external_scores(path, [3, 2])
        assert scores[0].values == (0.5, 1.5, 2.5)
        assert scores[1].values == (3.0, 4.0)
        assert all(s.source == "external" for s in scores)

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "scores.csv"
        self._write(path, [[1.0, 2.0]])
        with pytest.raises(ShapeMismatch):
            load_external_scores(path, [2, 3])

    def test_row_length_mismatch(self, tmp_path):
        path = tmp_path / "scores.csv"
        self._write(path, [[1.0, 2.0], [3.0]])
        with pytest.raises(ShapeMismatch):
            load_external_scores(path, [2, 2])

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        self._write(path, [[1.0, float("nan")]])
        with pytest.raises(NonFiniteScore):
            load_external_scores(path, [2])

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("1.0,abc\n")
        with pytest.raises(ShapeMismatch):
            load_external_scores(path, [2])
