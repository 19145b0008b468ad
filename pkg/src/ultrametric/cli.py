"""Command-line front end.

Exit codes: 0 success, 2 bad arguments, 3 unreadable or malformed input,
4 input that violates an operation's precondition.  Every output file
carries metadata (tool version, seed where relevant, parameters and,
unless ``--no-timestamp``, a UTC timestamp): as ``# key: value`` lines in
CSV files and under a ``"metadata"`` key in JSON files.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, agglomerate, baire, core, glattice, haar, io, kernels, padic, segment, umetry
from .errors import InputFormatError, PreconditionError

EXIT_OK, EXIT_ARGS, EXIT_INPUT, EXIT_PRECONDITION = 0, 2, 3, 4


# -- plumbing ---------------------------------------------------------------

def _metadata(args, command: str, **params) -> dict:
    meta = {"tool": "ultrametric", "version": __version__, "command": command}
    meta.update({k: v for k, v in params.items() if v is not None})
    if not args.no_timestamp:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return meta


def _emit_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_json(path, doc: dict) -> None:
    _emit_text(path, io.dumps_canonical(doc))


def _emit_csv(path, header, rows, meta) -> None:
    _emit_text(path, io.format_csv(header, rows, meta))


# -- cluster ----------------------------------------------------------------

def cmd_cluster(args) -> int:
    ids, _, values = io.read_table(args.input, id_column=args.id_column)
    labels = ids if args.id_column else None
    if args.constrained:
        if args.criterion != "complete":
            raise PreconditionError("--constrained supports only the complete criterion")
        tree = agglomerate.constrained_cluster(values, precomputed=args.precomputed, labels=labels,
                                               backend=args.backend)
    else:
        tree = agglomerate.cluster(values, args.criterion, precomputed=args.precomputed,
                                   labels=labels, backend=args.backend)
    meta = _metadata(args, "cluster", criterion=args.criterion, constrained=args.constrained,
                     precomputed=args.precomputed, input=str(args.input))
    doc = io.dendrogram_to_dict(tree)
    if tree.metadata.get("inversions"):
        meta["inversions"] = True
    doc["metadata"] = meta
    _emit_json(args.output, doc)
    if args.newick:
        Path(args.newick).write_text(io.to_newick(tree) + "\n", encoding="utf-8")
    if args.cophenetic:
        io.write_matrix(args.cophenetic, list(tree.terminals), core.cophenetic(tree), meta)
    return EXIT_OK


# -- ultrametric matrices ------------------------------------------------------

def cmd_ultrametric(args) -> int:
    labels, m = io.read_matrix(args.matrix)
    if args.action == "verify":
        check = core.verify_ultrametric(m, args.tol)
        doc = {"ultrametric": bool(check.ok),
               "witness": [labels[i] for i in check.witness] if check.witness else None,
               "metadata": _metadata(args, "ultrametric verify", tol=args.tol)}
        _emit_json(args.output, doc)
        return EXIT_OK if check.ok or not args.strict else EXIT_PRECONDITION
    order = core.ultrametric_order(m, args.tol)
    meta = _metadata(args, "ultrametric order", tol=args.tol, order=[labels[i] for i in order])
    io_labels = [labels[i] for i in order]
    if args.output in (None, "-"):
        _emit_json(None, {"order": io_labels, "metadata": meta})
    else:
        io.write_matrix(args.output, io_labels, core.permute(m, order), meta)
    return EXIT_OK


# -- baire ------------------------------------------------------------------

def cmd_baire(args) -> int:
    ids, _, values = io.read_table(args.input, id_column=args.id_column)
    res = baire.baire_cluster(values, seed=args.seed, precision=args.precision, base=args.base,
                              weights=args.weights, normalize=not args.no_normalize)
    meta = _metadata(args, "baire", seed=args.seed, precision=args.precision, base=args.base,
                     weights=args.weights, normalize=not args.no_normalize, input=str(args.input))
    rows = [[r.level, r.n_clusters, r.n_mixed] for r in res.report]
    if args.report:
        _emit_csv(args.report, ["level", "n_clusters", "n_mixed_blocks"], rows, meta)
    h = res.hierarchy
    doc = {
        "objects": ids,
        "projection": [float(v) for v in res.projection],
        "digits": ["".join(map(str, h.digits(i).digits)) if args.base <= 10 else str(h.digits(i))
                   for i in range(h.n)],
        "levels": [{"level": k, "n_clusters": h.n_clusters(k),
                    "labels": [int(v) for v in h.level_labels(k)]} for k in range(1, h.precision + 1)],
        "metadata": meta,
    }
    if args.output or not args.report:
        _emit_json(args.output, doc)
    return EXIT_OK


# -- padic ------------------------------------------------------------------

def _read_codes(path, p) -> padic.CharacteristicMatrix:
    ids, names, values = io.read_table(path, id_column=True)
    keep = [j for j, name in enumerate(names) if name != "decimal"]
    c = values[:, keep]
    if not np.all(np.isin(c, (-1, 0, 1))):
        r, j = np.argwhere(~np.isin(c, (-1, 0, 1)))[0]
        raise InputFormatError(f"{path}: row {r + 1}, column {names[keep[j]]!r}: coefficient must be -1, 0 or 1")
    return padic.CharacteristicMatrix(c.astype(np.int64), p, ids)


def _write_codes(path, cm: padic.CharacteristicMatrix, meta) -> None:
    header = ["terminal"] + [f"c_{j}" for j in range(1, cm.n_levels + 1)] + ["decimal"]
    rows = [[t, *map(int, row), str(v)] for t, row, v in zip(cm.terminals, cm.coefficients, cm.values())]
    _emit_csv(path, header, rows, meta)


def cmd_padic(args) -> int:
    if args.action == "encode":
        tree = io.read_dendrogram(args.tree)
        cm = padic.encode(tree, args.p, args.orientation)
        _write_codes(args.output, cm, _metadata(args, "padic encode", p=args.p,
                                                orientation=args.orientation, tree=str(args.tree)))
    elif args.action == "decode":
        tree = padic.decode(_read_codes(args.codes, args.p))
        doc = io.dendrogram_to_dict(tree)
        doc["metadata"] = _metadata(args, "padic decode", p=args.p, heights="ranks")
        _emit_json(args.output, doc)
    elif args.action == "distance":
        cm = _read_codes(args.codes, args.p)
        meta = _metadata(args, "padic distance", p=args.p)
        if args.a is not None or args.b is not None:
            if args.a is None or args.b is None:
                raise PreconditionError("--a and --b must be given together")
            idx = {t: i for i, t in enumerate(cm.terminals)}
            for name in (args.a, args.b):
                if name not in idx:
                    raise PreconditionError(f"unknown terminal {name!r}")
            a, b = cm.code(idx[args.a]), cm.code(idx[args.b])
            _emit_json(args.output, {"a": args.a, "b": args.b, "r": padic.padic_rank(a, b),
                                     "distance": padic.padic_distance(a, b), "metadata": meta})
        else:
            d = padic.distance_matrix(cm)
            rows = [[t, *map(float, row)] for t, row in zip(cm.terminals, d)]
            _emit_csv(args.output, ["", *cm.terminals], rows, meta)
    else:
        cm = padic.dilate(_read_codes(args.codes, args.p), args.times)
        _write_codes(args.output, cm, _metadata(args, "padic dilate", p=args.p, times=args.times))
    return EXIT_OK


# -- glattice ---------------------------------------------------------------

def cmd_glattice(args) -> int:
    ids, names, values = io.read_table(args.input, id_column=args.id_column)
    if not np.isin(values, (0, 1)).all():
        r, c = np.argwhere(~np.isin(values, (0, 1)))[0]
        raise InputFormatError(f"{args.input}: row {r + 1}, column {names[c]!r}: value must be 0 or 1")
    table = glattice.BooleanTable(values.astype(int), tuple(ids), tuple(names))
    clusters = glattice.clusters_at_level(table, args.level)
    doc = {"level": args.level, "clusters": glattice.cluster_labels(table, clusters),
           "metadata": _metadata(args, "glattice", level=args.level, input=str(args.input))}
    _emit_json(args.output, doc)
    return EXIT_OK


# -- haar -------------------------------------------------------------------

def _tree_and_data(args):
    tree = io.read_dendrogram(args.tree)
    ids, names, values = io.read_table(args.data, id_column=args.id_column)
    return tree, names, values


def cmd_haar(args) -> int:
    if args.action == "forward":
        tree, names, values = _tree_and_data(args)
        w = haar.forward(tree, values)
        header, cols = haar.to_table(w)
        rows = [[name, *map(float, row)] for name, row in zip(names, cols)]
        _emit_csv(args.output, ["attribute", *header], rows,
                  _metadata(args, "haar forward", tree=str(args.tree), data=str(args.data)))
        return EXIT_OK
    if args.action == "inverse":
        tree = io.read_dendrogram(args.tree)
        names, _, table = io.read_table(args.coeffs, id_column=True)
        n1 = tree.n_terminals - 1
        if table.shape[1] != n1 + 1:
            raise InputFormatError(
                f"{args.coeffs}: expected {n1 + 1} coefficient columns for a {tree.n_terminals}-terminal tree, "
                f"got {table.shape[1]}"
            )
        details = table[:, 1:][:, ::-1].T  # columns d_{n-1}..d_1 -> rows by rank
        w = haar.WaveletDecomposition(table[:, 0].copy(), np.ascontiguousarray(details), tree,
                                      tuple(nd.left for nd in tree.nodes))
        values = haar.inverse(w)
        meta = _metadata(args, "haar inverse", tree=str(args.tree), coeffs=str(args.coeffs))
    else:
        tree, names, values = _tree_and_data(args)
        values = haar.regress(haar.forward(tree, values), args.threshold)
        meta = _metadata(args, "haar regress", threshold=args.threshold, tree=str(args.tree))
    rows = [[t, *map(float, row)] for t, row in zip(tree.terminals, values)]
    _emit_csv(args.output, ["terminal", *names], rows, meta)
    return EXIT_OK


# -- umetry -----------------------------------------------------------------

def cmd_umetry(args) -> int:
    header = ["n_points", "dim", "isosceles", "equilateral", "ultrametric"]
    meta = _metadata(args, "umetry", seed=args.seed, triangles=args.triangles, mode=args.mode,
                     tol=umetry._resolve(args.mode, args.tol), kind=None if args.input else args.kind)
    if args.input:
        _, _, x = io.read_table(args.input, id_column=args.id_column)
        rep = umetry.ultrametricity(x, args.triangles, args.seed, args.tol, args.mode)
        n, dim = x.shape
    else:
        rep = umetry.cloud_ultrametricity(args.kind, args.n, args.dim, args.triangles, args.seed,
                                          args.tol, args.mode)
        n, dim = args.n, args.dim
    row = [n, dim, rep.isosceles_small_base, rep.equilateral, rep.ultrametric]
    _emit_csv(args.output, header, [row], meta)
    return EXIT_OK


# -- segment ----------------------------------------------------------------

def cmd_segment(args) -> int:
    sig = io.read_signal(args.signal)
    spec = segment.EmbeddingSpec(args.window, args.step, args.first, args.last)
    res = segment.segment_signal(sig, spec, args.segments, use_pcoa=not args.raw,
                                 pcoa_dims=args.pcoa_dims)
    meta = _metadata(args, "segment", seed=args.seed, window=args.window, step=args.step,
                     first=args.first, last=args.last, segments=args.segments,
                     pcoa=not args.raw, pcoa_dims=args.pcoa_dims, signal=str(args.signal))
    if args.emit_histogram or args.emit_bic:
        m = segment.embed(sig, spec)
        if m.shape[0] < 2:
            raise PreconditionError("histogram and mixture outputs need at least 2 windows")
        hist = segment.distance_histogram(m, args.bins)
        if args.emit_histogram:
            _emit_csv(args.emit_histogram, ["bin_lo", "bin_hi", "count"], hist.rows(), meta)
        if args.emit_bic:
            fits, best = segment.gmm_bic(hist.distances, args.k_max, args.seed)
            rows = [[f.k, f.bic, f.loglik, " ".join(io.format_float(v) for v in f.means),
                     " ".join(io.format_float(v) for v in f.sds),
                     " ".join(io.format_float(v) for v in f.weights)] for f in fits]
            bic_meta = dict(meta, best_k=best,
                            candidate_cluster_counts=segment.candidate_cluster_counts(best))
            _emit_csv(args.emit_bic, ["k", "bic", "loglik", "means", "sds", "weights"], rows, bic_meta)
    if args.emit_pcoa:
        if res.pcoa is None:
            raise PreconditionError("--emit-pcoa needs PCoA (drop --raw) and at least 2 windows")
        k = res.pcoa.coordinates.shape[1]
        rows = [[t, int(s), int(lab), *map(float, c)]
                for t, (s, lab, c) in enumerate(zip(res.starts, res.labels, res.pcoa.coordinates))]
        pmeta = dict(meta, variance_fractions=[float(v) for v in res.pcoa.variance_fractions],
                     negative_fraction=res.pcoa.negative_fraction)
        _emit_csv(args.emit_pcoa, ["window", "start", "segment", *[f"axis_{a + 1}" for a in range(k)]],
                  rows, pmeta)
    _emit_json(args.output, {"segments": [s.as_dict() for s in res.segments], "metadata": meta})
    return EXIT_OK


# -- bench ------------------------------------------------------------------

def _timed(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    if args.mode == "scaling":
        header = ["n", "baire_seconds", "pairwise_seconds"]
        for n in args.sizes:
            m = baire.synthetic_occupancy(n, args.columns, args.density, args.seed)
            tb = _timed(lambda: baire.baire_cluster(m, seed=args.seed, precision=args.precision), args.repeats)
            tp = None
            if n <= args.max_pairwise:
                dense = rng.random((n, args.pairwise_dim))
                tp = _timed(lambda: agglomerate.cluster(dense, args.criterion), args.repeats)
            rows.append([n, tb, tp if tp is not None else "NA"])
    else:
        header = ["n", "criterion", *[f"{b}_seconds" for b in kernels.available_backends()]]
        for n in args.sizes:
            x = rng.random((n, 8))
            for crit in args.criteria:
                times = [_timed(lambda b=b: agglomerate.cluster(x, crit, backend=b), args.repeats)
                         for b in kernels.available_backends()]
                rows.append([n, crit, *times])
    meta = _metadata(args, "bench", mode=args.mode, seed=args.seed, backend=kernels.BACKEND)
    _emit_csv(args.output, header, rows, meta)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} is not >= 1")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{v} is not >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from output metadata")
    common.add_argument("--threads", type=_positive_int, default=None, help="cap on BLAS/OpenMP threads")

    p = argparse.ArgumentParser(prog="ultrametric", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", parents=[common], help="agglomerative clustering to a dendrogram JSON")
    c.add_argument("--input", required=True, help="CSV of observations (or a square matrix with --precomputed)")
    c.add_argument("--id-column", action="store_true", help="first CSV column holds object ids")
    c.add_argument("--criterion", choices=agglomerate.CRITERIA, default="complete")
    c.add_argument("--constrained", action="store_true", help="contiguity-constrained complete link in row order")
    c.add_argument("--precomputed", action="store_true", help="input is a dissimilarity matrix")
    c.add_argument("--backend", choices=["cython", "python"], default=None)
    c.add_argument("--output", help="dendrogram JSON (default stdout)")
    c.add_argument("--newick", help="also write a Newick file")
    c.add_argument("--cophenetic", help="also write the cophenetic matrix CSV")
    c.set_defaults(func=cmd_cluster)

    u = sub.add_parser("ultrametric", parents=[common], help="verify or reorder an ultrametric matrix")
    u.add_argument("action", choices=["verify", "order"])
    u.add_argument("--matrix", required=True, help="square labelled matrix CSV")
    u.add_argument("--tol", type=_nonneg_float, default=None, help="absolute tolerance (default 1e-9 x max entry)")
    u.add_argument("--strict", action="store_true", help="verify: exit 4 when the matrix is not ultrametric")
    u.add_argument("--output", help="JSON report (verify) or reordered matrix CSV (order)")
    u.set_defaults(func=cmd_ultrametric)

    b = sub.add_parser("baire", parents=[common], help="Baire prefix clustering via random projection")
    b.add_argument("--input", required=True)
    b.add_argument("--id-column", action="store_true")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--precision", type=_positive_int, default=4)
    b.add_argument("--base", type=int, default=10, choices=[2, 10, 16])
    b.add_argument("--weights", choices=baire.WEIGHT_SCHEMES, default="uniform")
    b.add_argument("--no-normalize", action="store_true", help="skip column-sum normalization")
    b.add_argument("--report", help="per-level cluster counts CSV")
    b.add_argument("--output", help="hierarchy JSON")
    b.set_defaults(func=cmd_baire)

    pa = sub.add_parser("padic", help="p-adic dendrogram codes")
    psub = pa.add_subparsers(dest="action", required=True)
    e = psub.add_parser("encode", parents=[common], help="dendrogram JSON -> codes CSV")
    e.add_argument("--tree", required=True)
    e.add_argument("--p", type=int, default=3)
    e.add_argument("--orientation", choices=padic.ORIENTATIONS, default="canonical")
    e.add_argument("--output")
    d = psub.add_parser("decode", parents=[common], help="codes CSV -> dendrogram JSON")
    d.add_argument("--codes", required=True)
    d.add_argument("--p", type=int, default=3)
    d.add_argument("--output")
    di = psub.add_parser("distance", parents=[common], help="p-adic distances between codes")
    di.add_argument("--codes", required=True)
    di.add_argument("--p", type=int, default=3)
    di.add_argument("--a", help="terminal label")
    di.add_argument("--b", help="terminal label")
    di.add_argument("--output")
    dl = psub.add_parser("dilate", parents=[common], help="multiply all codes by 1/p")
    dl.add_argument("--codes", required=True)
    dl.add_argument("--p", type=int, default=3)
    dl.add_argument("--times", type=int, default=1)
    dl.add_argument("--output")
    for q in (e, d, di, dl):
        q.set_defaults(func=cmd_padic)

    g = sub.add_parser("glattice", parents=[common], help="clusters of boolean objects at a set-distance level")
    g.add_argument("--input", required=True)
    g.add_argument("--id-column", action="store_true")
    g.add_argument("--level", type=int, required=True)
    g.add_argument("--output")
    g.set_defaults(func=cmd_glattice)

    h = sub.add_parser("haar", help="Haar wavelet transform over a dendrogram")
    hsub = h.add_subparsers(dest="action", required=True)
    hf = hsub.add_parser("forward", parents=[common], help="coefficients table (attributes x s, d_{n-1}..d_1)")
    hi = hsub.add_parser("inverse", parents=[common], help="reconstruct data from a coefficients table")
    hr = hsub.add_parser("regress", parents=[common], help="zero small details and reconstruct")
    for q in (hf, hi, hr):
        q.add_argument("--tree", required=True)
        q.add_argument("--output")
        q.set_defaults(func=cmd_haar)
    for q in (hf, hr):
        q.add_argument("--data", required=True)
        q.add_argument("--id-column", action="store_true")
    hi.add_argument("--coeffs", required=True)
    hr.add_argument("--threshold", type=_nonneg_float, required=True)

    um = sub.add_parser("umetry", parents=[common], help="ultrametricity of a point cloud")
    um.add_argument("--kind", choices=umetry.KINDS, default="gaussian")
    um.add_argument("--n", type=_positive_int, default=100)
    um.add_argument("--dim", type=_positive_int, default=20)
    um.add_argument("--input", help="measure this CSV point cloud instead of generating one")
    um.add_argument("--id-column", action="store_true")
    um.add_argument("--triangles", type=_positive_int, default=300)
    um.add_argument("--seed", type=int, default=0)
    um.add_argument("--mode", choices=umetry.MODES, default="angle")
    um.add_argument("--tol", type=_nonneg_float, default=None,
                    help="degrees for --mode angle (default 2), relative for --mode side (default 0.01)")
    um.add_argument("--output")
    um.set_defaults(func=cmd_umetry)

    s = sub.add_parser("segment", parents=[common], help="segment a signal by constrained clustering")
    s.add_argument("--signal", required=True, help="CSV with a header; the first column is used")
    s.add_argument("--window", type=_positive_int, required=True)
    s.add_argument("--step", type=_positive_int, required=True)
    s.add_argument("--first", type=int, default=0, help="first window start (0-based)")
    s.add_argument("--last", type=int, default=None, help="last window start (default: last that fits)")
    s.add_argument("--segments", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--raw", action="store_true", help="cluster the raw windows instead of PCoA coordinates")
    s.add_argument("--pcoa-dims", type=_positive_int, default=2)
    s.add_argument("--bins", type=_positive_int, default=50)
    s.add_argument("--k-max", type=_positive_int, default=6)
    s.add_argument("--emit-histogram")
    s.add_argument("--emit-pcoa")
    s.add_argument("--emit-bic", help="mixture fits of the pairwise distances, one row per k")
    s.add_argument("--output")
    s.set_defaults(func=cmd_segment)

    be = sub.add_parser("bench", parents=[common], help="timing runs")
    be.add_argument("--mode", choices=["scaling", "kernels"], default="scaling")
    be.add_argument("--sizes", type=_positive_int, nargs="+", default=[1000, 10000, 100000])
    be.add_argument("--columns", type=_positive_int, default=1000)
    be.add_argument("--density", type=float, default=0.08)
    be.add_argument("--precision", type=_positive_int, default=4)
    be.add_argument("--criterion", choices=agglomerate.CRITERIA, default="complete")
    be.add_argument("--criteria", nargs="+", choices=agglomerate.CRITERIA, default=["single", "complete", "ward"])
    be.add_argument("--pairwise-dim", type=_positive_int, default=50)
    be.add_argument("--max-pairwise", type=int, default=10000,
                    help="skip pairwise clustering above this n (memory is quadratic)")
    be.add_argument("--repeats", type=_positive_int, default=3)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--output")
    be.set_defaults(func=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ARGS
    limit = contextlib.nullcontext()
    if getattr(args, "threads", None):
        from threadpoolctl import threadpool_limits

        limit = threadpool_limits(limits=args.threads)
    try:
        with limit:
            return args.func(args)
    except InputFormatError as exc:
        print(f"ultrametric: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"ultrametric: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"ultrametric: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
