"""End-to-end gate: one test per headline requirement, one printed verdict each.

Run with -s to see the verdict lines on success; they also appear in captured
output on failure.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from moddyn import (
    MtbConfig,
    RepresentationStack,
    ScoreRecord,
    ScoreSet,
    SynthSpec,
    TrainConfig,
    backward,
    eer,
    evaluate,
    gen_dataset,
    gen_stack,
    init_params,
    load_checkpoint,
    loss,
    mtb_transform,
    read_stack,
    roc_points,
    save_checkpoint,
    stft_frames,
    train,
    load_examples,
    write_scores,
    write_stack,
)
from moddyn.cli import main as cli_main

from oracles import brute_eer, central_difference, counting_roc, loop_mtb, make_window


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def test_stft_oracle():
    with criterion("stft-oracle"):
        started = time.monotonic()
        cfg = MtbConfig()
        rng = np.random.default_rng(2024)
        win = make_window(6, "hann")
        for _ in range(100):
            dims = (
                int(rng.integers(1, 4)),
                int(rng.integers(1, 9)),
                int(rng.integers(1, 65)),
            )
            stack = RepresentationStack(
                data=rng.standard_normal(dims).astype(np.float32), frame_rate=50.0
            )
            weights = rng.uniform(0.1, 1.0, dims[0])
            got = mtb_transform(stack, weights, cfg)
            want = loop_mtb(stack.data, weights, 6, 2, win, cfg.epsilon)
            assert np.max(np.abs(got.values - want)) <= 1e-6
        assert time.monotonic() - started < 10.0


def test_parseval():
    with criterion("parseval"):
        rng = np.random.default_rng(7)
        w = 8
        cfg = MtbConfig(window_frames=w, hop_frames=w, window_function="rectangular")
        bin_weights = np.ones(w // 2 + 1)
        bin_weights[1:-1] = 2.0
        for _ in range(50):
            n_frames = int(rng.integers(1, 6))
            x = rng.standard_normal(w * n_frames)
            spectra = stft_frames(x, cfg, 50.0)
            spectral = float(
                np.sum(bin_weights[:, None] * np.abs(spectra) ** 2) / w
            )
            direct = float(np.sum(x * x))
            assert abs(spectral - direct) <= 1e-6 * direct


FIELDS = [("layer_weights", (3,)), ("w1", (5, 4)), ("b1", (5,)), ("w2", (5,)), ("b2", None)]


def test_gradient_suite():
    with criterion("gradient-suite"):
        started = time.monotonic()
        cfg = MtbConfig()
        for variant in ("raw", "proposed"):
            for trial in range(3):
                rng = np.random.default_rng(100 * trial + (variant == "proposed"))
                stack = RepresentationStack(
                    data=rng.standard_normal((3, 4, 30)).astype(np.float32),
                    frame_rate=50.0,
                )
                params = init_params(variant, 3, 4, hidden=5, rng=rng)
                label = trial % 2

                def fun(q):
                    from moddyn import forward

                    s, _ = forward(q, stack, cfg)
                    return loss(s, label)

                _, grads = backward(params, stack, cfg, label)
                for field, shape in FIELDS:
                    g = getattr(grads, field)
                    indices = [None] if shape is None else list(np.ndindex(*shape))
                    for idx in indices:
                        fd = central_difference(fun, params, field, idx, step=1e-4)
                        analytic = float(g) if idx is None else float(g[idx])
                        assert abs(analytic - fd) <= 1e-4 * abs(fd) + 1e-6, (
                            variant,
                            field,
                            idx,
                        )
        assert time.monotonic() - started < 30.0


def test_eer_oracle():
    with criterion("eer-oracle"):
        rng = np.random.default_rng(31)
        for trial in range(200):
            nb = int(rng.integers(1, 201))
            ns = int(rng.integers(1, 201))
            sep = float(rng.uniform(0.0, 2.0))
            bona = 1.0 / (1.0 + np.exp(-(rng.standard_normal(nb) + sep)))
            spoof = 1.0 / (1.0 + np.exp(-(rng.standard_normal(ns) - sep)))
            items = [ScoreRecord(f"b{i}", s, "bonafide") for i, s in enumerate(bona)]
            items += [ScoreRecord(f"s{i}", s, "spoof") for i, s in enumerate(spoof)]
            ss = ScoreSet(items)

            curve = roc_points(ss)
            o_thr, o_far, o_frr = counting_roc(bona.tolist(), spoof.tolist())
            assert np.array_equal(curve.thresholds, o_thr)
            assert np.array_equal(curve.far, o_far)
            assert np.array_equal(curve.frr, o_frr)

            slack = 1.0 / (2.0 * min(nb, ns))
            assert abs(eer(ss).value - brute_eer(bona.tolist(), spoof.tolist())) <= slack + 1e-12


@pytest.fixture(scope="module")
def trained_variants(tmp_path_factory):
    root = tmp_path_factory.mktemp("variants")
    started = time.monotonic()
    manifest = gen_dataset(
        SynthSpec(), {"train": 200, "valid": 50, "eval": 100}, root / "data"
    )
    train_examples = load_examples(manifest, "train")
    valid_examples = load_examples(manifest, "valid")
    mtb_cfg = MtbConfig()
    runs = {}
    for variant in ("proposed", "raw"):
        result = train(train_examples, valid_examples, variant, mtb_cfg, TrainConfig())
        scores = evaluate(result.params, manifest, "eval", mtb_cfg)
        path = root / f"{variant}.scores.txt"
        write_scores(scores, path)
        runs[variant] = {
            "result": result,
            "eer": eer(scores).value,
            "scores_path": path,
        }
    runs["elapsed"] = time.monotonic() - started
    runs["root"] = root
    return runs


def test_variant_separation(trained_variants):
    with criterion("variant-separation"):
        proposed = trained_variants["proposed"]["eer"]
        raw = trained_variants["raw"]["eer"]
        assert proposed <= 0.05, f"proposed eval EER {proposed:.4f}"
        assert raw >= 0.30, f"raw eval EER {raw:.4f}"
        assert trained_variants["elapsed"] < 300.0


def test_modulation_peak_location(tmp_path):
    with criterion("modulation-peak-location"):
        spec = SynthSpec()
        hits = 0
        for seed in range(50):
            rng_clean = np.random.default_rng(seed)
            rng_mod = np.random.default_rng(seed)
            clean = gen_stack(spec, "clean", rng_clean)
            mod = gen_stack(spec, "modulated", rng_mod)
            ref_path = tmp_path / f"ref{seed}.repstk"
            mod_path = tmp_path / f"mod{seed}.repstk"
            write_stack(clean, ref_path)
            write_stack(mod, mod_path)
            table = tmp_path / f"t{seed}.csv"
            code = cli_main(
                [
                    "visualize",
                    str(mod_path),
                    "--reference", str(ref_path),
                    "--out", str(table),
                    "--window-frames", "6",
                    "--hop-frames", "2",
                    "--window-function", "rectangular",
                ]
            )
            assert code == 0
            rows = table.read_text().strip().splitlines()
            diffs = [float(v) for v in rows[1].split(",")[1:]]
            # planted AM sits on the first nonzero modulation bin
            nonzero = diffs[1:]
            if nonzero.index(max(nonzero)) == 0:
                hits += 1
        assert hits >= 45, f"{hits}/50"


def test_significance_sanity(trained_variants, capsys):
    with criterion("significance-sanity"):
        a = str(trained_variants["proposed"]["scores_path"])
        b = str(trained_variants["raw"]["scores_path"])
        capsys.readouterr()
        assert cli_main(["compare", "--scores-a", a, "--scores-b", b]) == 0
        cells = capsys.readouterr().out.strip().split(",")
        assert cells[3] == "true"
        assert cells[4] == "A"

        assert cli_main(["compare", "--scores-a", a, "--scores-b", a]) == 0
        cells = capsys.readouterr().out.strip().split(",")
        assert cells[3] == "false"
        assert cells[4] == "tie"


def test_determinism_and_round_trips(tmp_path):
    with criterion("determinism-round-trips"):
        import io

        spec = SynthSpec(layers=2, features=8, time_steps=60, seed=3)
        manifest = gen_dataset(spec, {"train": 6, "valid": 4}, tmp_path / "d")
        tr = load_examples(manifest, "train")
        va = load_examples(manifest, "valid")
        cfg = TrainConfig(max_epochs=3, patience=9, seed=5, hidden=8)

        logs, ckpts = [], []
        for tag in ("a", "b"):
            buf = io.StringIO()
            res = train(tr, va, "proposed", MtbConfig(), cfg, log_stream=buf)
            path = tmp_path / f"{tag}.json"
            save_checkpoint(path, res.params, res.log, MtbConfig())
            logs.append(buf.getvalue())
            ckpts.append(path.read_bytes())
        assert logs[0] == logs[1]
        assert ckpts[0] == ckpts[1]

        # container round trip is exact
        rng = np.random.default_rng(0)
        stack = RepresentationStack(
            data=rng.standard_normal((2, 5, 17)).astype(np.float32), frame_rate=49.5
        )
        p = tmp_path / "rt.repstk"
        write_stack(stack, p)
        back = read_stack(p)
        assert np.array_equal(back.data, stack.data)
        assert back.frame_rate == np.float32(49.5)

        # checkpoint reload preserves every parameter bit
        ck = load_checkpoint(tmp_path / "a.json")
        resaved = tmp_path / "a2.json"
        save_checkpoint(resaved, ck.params, ck.log, ck.mtb_cfg)
        assert resaved.read_bytes() == (tmp_path / "a.json").read_bytes()
