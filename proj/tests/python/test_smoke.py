import math
from pathlib import Path

import numpy as np
import pytest

import reco

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def husky():
    return reco.Taxonomy.load(FIXTURES / "husky" / "edges.tsv", FIXTURES / "husky" / "nodes.tsv")


def tree():
    edges = [("root", f"t{a}") for a in range(2)]
    edges += [(f"t{a}", f"t{a}l{b}") for a in range(2) for b in range(3)]
    return reco.Taxonomy.from_edges(edges)


def test_husky_similarity():
    table = reco.similarity_table(husky(), ["husky", "labrador"])
    assert table.normalized[0, 1] == pytest.approx(0.4354249659464204, abs=1e-15)
    assert table.accept_prob[0, 1] == pytest.approx(0.5645750340535796, abs=1e-15)
    assert reco.raw_similarity(husky(), "husky", "husky") == pytest.approx(math.log(7))


def test_losses_reduce_to_each_other():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(8, 5))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    labels = [0, 1, 0, 2]
    full = ~np.eye(8, dtype=bool)
    s = reco.supcon(z, labels, 0.5)
    r = reco.reco_loss(z, labels, full, 0.5)
    assert s.value == r.value
    assert np.array_equal(s.grad_z, r.grad_z)
    assert reco.paco(z, labels, np.zeros((0, 5)), 0.5).value == s.value
    assert reco.supcon(z, [0, 1, 2, 3], 0.5).value == reco.info_nce(z, [0, 1, 2, 3], 0.5).value


def test_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(6, 3))
    labels = [0, 0, 1]
    mask = rng.random((6, 6)) < 0.7
    res = reco.combined(z, labels, rng.normal(size=(2, 3)), mask, base="paco", temperature=0.7)
    centers = np.asarray(res.grad_centers)
    assert centers.shape == (2, 3)
    h = 1e-6
    e = np.zeros_like(z)
    e[2, 1] = h
    c = rng.normal(size=(2, 3))
    f = lambda zz: reco.supcon(zz, labels, 0.7).value
    num = (f(z + e) - f(z - e)) / (2 * h)
    assert reco.supcon(z, labels, 0.7).grad_z[2, 1] == pytest.approx(num, rel=1e-6)


def test_sampler_is_keyed_and_never_picks_same_class():
    tax = tree()
    table = reco.similarity_table(tax)
    probs = reco.acceptance_matrix(table, [0, 0, 1, 3, 3])
    a = reco.draw_mask(probs, seed=5, step=2)
    assert np.array_equal(a, reco.draw_mask(probs, seed=5, step=2))
    assert not a[0, 1] and not a[1, 0] and not a[3, 4]
    assert not a.diagonal().any()
    assert 0.0 <= reco.keyed_uniform(1, 2, 3, 4) < 1.0


def test_generate_train_probe_round_trip():
    tax = tree()
    data = reco.generate(tax, seed=3, samples_per_class=30)
    assert len(data) == 6 * 30
    assert data.features.shape == (180, 16)
    run = reco.train(data, tax, objective="reco_supcon", epochs=3, seed=3)
    again = reco.train(data, tax, objective="reco_supcon", epochs=3, seed=3)
    assert run.encoder == again.encoder
    assert len(run.history) == 3 and all(math.isfinite(v) for v in run.history)
    emb = run.encoder.embed(data.features)
    assert np.allclose(np.linalg.norm(emb, axis=1), 1.0)
    results = reco.probe_realms(emb, data)
    assert {r.realm for r in results} <= set(data.realms)
    assert all(0.0 <= r.top1 <= 1.0 for r in results)


def test_divergence_raises_numeric_error():
    tax = tree()
    data = reco.generate(tax, seed=1, samples_per_class=20)
    with pytest.raises(reco.NumericDivergence, match="epoch"):
        reco.train(data, tax, epochs=2, lr_max=1e300)


def test_errors_carry_their_category():
    with pytest.raises(reco.DataError):
        reco.Taxonomy.from_edges([("a", "b"), ("b", "a")])
    with pytest.raises(reco.ConfigError):
        reco.TrainConfig().objective = "nope"
    assert issubclass(reco.ConfigError, reco.RecoError)


def test_probe_separable_and_self_report_zero():
    rng = np.random.default_rng(2)
    y = np.arange(200) % 2
    x = np.stack([np.where(y == 1, 5.0, -5.0) + rng.normal(size=200), rng.normal(size=200)], axis=1)
    clf = reco.fit_linear_probe(x, y.tolist(), 2)
    assert reco.evaluate(clf, x, y.tolist()).top1 == 1.0
    base = reco.read_results_csv(FIXTURES / "report" / "baseline_results.csv")
    rep = reco.relative_report(base, base)
    assert rep.average == 0.0 and not any(rep.delta_pp)


def test_lr_schedule_endpoints():
    cfg = reco.TrainConfig()
    assert reco.lr_at(cfg, 0, 100) == pytest.approx(0.1, abs=1e-12)
    assert reco.lr_at(cfg, 50, 100) == pytest.approx(0.05, abs=1e-12)
    assert reco.lr_at(cfg, 100, 100) == pytest.approx(0.0, abs=1e-12)


def test_dhash_and_dedup(tmp_path):
    img = (np.arange(64 * 48, dtype=np.uint8).reshape(48, 64) * 7) % 251
    h = reco.dhash(img)
    assert reco.hash_hex(h) == f"{h:016x}"
    assert reco.dhash(np.repeat(img[:, :, None], 3, axis=2)) == h

    def pgm(path, a):
        path.write_bytes(b"P5\n%d %d\n255\n" % (a.shape[1], a.shape[0]) + a.tobytes())

    pgm(tmp_path / "ref.pgm", img)
    pgm(tmp_path / "copy.pgm", img)
    pgm(tmp_path / "other.pgm", img[::-1].copy())
    (tmp_path / "refs.csv").write_text("id,path\nr0,ref.pgm\n")
    (tmp_path / "cands.csv").write_text("id,path\nc0,copy.pgm\nc1,other.pgm\n")
    kept, removed, warnings = reco.dedup(tmp_path / "cands.csv", [tmp_path / "refs.csv"])
    assert kept == ["c1"]
    assert [r[:2] for r in removed] == [("c0", "r0")]
    assert warnings == []


def test_curation():
    nodes = [reco.ConceptNode("root"), reco.ConceptNode("a"), reco.ConceptNode("b", image_count=500),
             reco.ConceptNode("c", image_count=10), reco.ConceptNode("d", image_count=900, offensive=True)]
    tax = reco.Taxonomy.from_edges([("root", "a"), ("a", "b"), ("a", "c"), ("root", "d")], nodes)
    valid, rejected = reco.filter_concepts(tax, 200)
    assert valid == ["b"]
    assert {r[0] for r in rejected} == {"root", "a", "c", "d"}
    realms = reco.select_realms(tax, valid, ["a"], min_classes=1)
    assert realms == [("a", "selected", ["b"])]
