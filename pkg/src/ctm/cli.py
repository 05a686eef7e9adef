"""Command-line pipeline: prepare, train, infer, graph, similar, eval, export."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import evaluation, export, graph as graph_mod, plots
from .corpus import build_corpus, default_stop_words, load_corpus, save_corpus
from .estimation import FitConfig, fit
from .lda import LdaModel, lda_fit, save_lda_model
from .model import CtmModel, load_model, load_states, save_ctm_model, save_states
from .numerics import softmax


def _echo_config(name: str, params: dict) -> None:
    click.echo(f"[{name}] " + " ".join(f"{k}={v}" for k, v in sorted(params.items())),
               err=True)


@click.group()
@click.option("--seed", default=0, show_default=True, help="Global random seed.")
@click.option("--threads", default=1, show_default=True, help="Worker threads.")
@click.pass_context
def main(ctx, seed, threads):
    """Correlated topic model pipeline."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["threads"] = threads


@main.command()
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True),
              help="Directory of UTF-8 .txt files (one document each).")
@click.option("--output", required=True, type=click.Path(),
              help="Corpus directory to write.")
@click.option("--min-term-count", default=1, show_default=True)
@click.option("--stop-words", "stop_file", type=click.Path(exists=True),
              help="Stop-word file (one per line); defaults to the bundled list.")
@click.pass_context
def prepare(ctx, input_dir, output, min_term_count, stop_file):
    """Tokenize raw text files into a bag-of-words corpus directory."""
    _echo_config("prepare", {"input": input_dir, "output": output,
                             "min_term_count": min_term_count})
    stops = default_stop_words()
    if stop_file:
        stops = {
            line.strip()
            for line in Path(stop_file).read_text("utf-8").splitlines()
            if line.strip()
        }
    files = sorted(Path(input_dir).glob("*.txt"))
    if not files:
        raise click.ClickException(f"no .txt files in {input_dir}")
    docs = [(f.stem, f.read_text("utf-8")) for f in files]
    corpus = build_corpus(docs, stop_words=stops, min_term_count=min_term_count)
    save_corpus(corpus, output)
    click.echo(f"wrote corpus: D={corpus.D} V={corpus.V}", err=True)


@main.command()
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--model", "model_type", type=click.Choice(["ctm", "lda"]),
              default="ctm", show_default=True)
@click.option("--k", required=True, type=int, help="Number of topics.")
@click.option("--tol", default=1e-5, show_default=True, help="EM relative tolerance.")
@click.option("--em-iters", default=1000, show_default=True)
@click.option("--output", required=True, type=click.Path())
@click.pass_context
def train(ctx, corpus_dir, model_type, k, tol, em_iters, output):
    """Fit a CTM or LDA model on a corpus directory."""
    seed, threads = ctx.obj["seed"], ctx.obj["threads"]
    _echo_config("train", {"corpus": corpus_dir, "model": model_type, "k": k,
                           "tol": tol, "em_iters": em_iters, "seed": seed})
    corpus = load_corpus(corpus_dir)
    config = FitConfig(k=k, em_rel_tol=tol, max_em_iters=em_iters, seed=seed)
    cfg_doc = {"k": k, "tol": tol, "em_iters": em_iters, "seed": seed}
    if model_type == "ctm":
        model, states, trace = fit(corpus, config, threads=threads)
        save_ctm_model(model, output, config=cfg_doc,
                       meta={"em_iterations": trace.iterations})
    else:
        model, states, trace = lda_fit(corpus, config, threads=threads)
        save_lda_model(model, output, config=cfg_doc,
                       meta={"em_iterations": trace.iterations})
    click.echo(f"fit {model_type} K={k}: {trace.iterations} EM iterations, "
               f"final bound {trace.elbo[-1]:.2f}", err=True)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--output", required=True, type=click.Path())
@click.pass_context
def infer(ctx, model_path, corpus_dir, output):
    """Infer per-document variational states under a fitted CTM."""
    from .estimation import e_step

    _echo_config("infer", {"model": model_path, "corpus": corpus_dir})
    model = load_model(model_path)
    if not isinstance(model, CtmModel):
        raise click.ClickException("infer requires a CTM model file")
    corpus = load_corpus(corpus_dir)
    config = FitConfig(k=model.K)
    states = e_step(corpus, model, config, threads=ctx.obj["threads"])
    save_states(states, [d.doc_id for d in corpus.documents], output)
    click.echo(f"inferred {corpus.D} documents", err=True)


@main.command("graph")
@click.option("--states", "states_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", type=click.Path(exists=True),
              help="Model file, for topic word labels.")
@click.option("--rho", default=0.1, show_default=True, help="Lasso penalty.")
@click.option("--rho-grid", default=None,
              help="Comma-separated penalties; writes one graph per value.")
@click.option("--rule", type=click.Choice(["and", "or"]), default="and",
              show_default=True)
@click.option("--output", required=True, type=click.Path(),
              help="Output path prefix (.json and .dot are appended).")
def graph_cmd(states_path, model_path, rho, rho_grid, rule, output):
    """Build the sparse topic graph from inferred states."""
    _echo_config("graph", {"states": states_path, "rho": rho, "rule": rule})
    _, states = load_states(states_path)
    lam = np.stack([s.lam for s in states])
    model = load_model(model_path) if model_path else None
    rhos = [float(r) for r in rho_grid.split(",")] if rho_grid else [rho]
    for r in rhos:
        g = graph_mod.build_graph(lam, r, rule)
        prefix = Path(output) if len(rhos) == 1 else Path(f"{output}_rho{r:g}")
        graph_mod.save_graph(g, prefix, model)
        click.echo(f"rho={r:g}: {len(g.edges)} edges", err=True)


@main.command()
@click.option("--states", "states_path", required=True, type=click.Path(exists=True))
@click.option("--query", required=True, help="Query document id.")
@click.option("--top-n", default=10, show_default=True)
@click.option("--samples", default=evaluation.DEFAULT_MOMENT_SAMPLES, show_default=True)
@click.pass_context
def similar(ctx, states_path, query, top_n, samples):
    """Rank documents by expected Hellinger distance to a query document."""
    ids, states = load_states(states_path)
    if query not in ids:
        raise click.ClickException(f"unknown document id {query!r}")
    qi = ids.index(query)
    ranked = evaluation.rank_similar(qi, states, top_n=top_n,
                                     n_samples=samples, seed=ctx.obj["seed"])
    click.echo(json.dumps(
        {"query": query,
         "results": [{"id": ids[i], "distance": d} for i, d in ranked]},
        indent=2,
    ))


@main.command("eval")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--folds", default=10, show_default=True)
@click.option("--k-grid", default="5", show_default=True,
              help="Comma-separated topic counts for cross-validation.")
@click.option("--p-grid", default=None,
              help="Comma-separated observed-word counts; enables the perplexity run.")
@click.option("--k", "perp_k", default=5, show_default=True,
              help="Topic count for the perplexity run.")
@click.option("--samples", default=evaluation.DEFAULT_HELDOUT_SAMPLES, show_default=True)
@click.option("--tol", default=1e-4, show_default=True)
@click.option("--em-iters", default=100, show_default=True)
@click.option("--output", required=True, type=click.Path(),
              help="Report directory (JSON + CSV + PNG).")
@click.pass_context
def eval_cmd(ctx, corpus_dir, folds, k_grid, p_grid, perp_k, samples, tol,
             em_iters, output):
    """Cross-validated held-out likelihood and predictive perplexity."""
    seed, threads = ctx.obj["seed"], ctx.obj["threads"]
    _echo_config("eval", {"corpus": corpus_dir, "folds": folds, "k_grid": k_grid,
                          "p_grid": p_grid, "samples": samples, "seed": seed})
    corpus = load_corpus(corpus_dir)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)

    ks = [int(s) for s in k_grid.split(",")]
    base = dict(em_rel_tol=tol, max_em_iters=em_iters, seed=seed)
    report = evaluation.cross_validate(
        corpus, FitConfig(k=ks[0], **base), FitConfig(k=ks[0], **base),
        folds=folds, k_grid=ks, seed=seed, n_samples=samples, threads=threads,
    )
    report.save(out / "cv_report.json")
    with open(out / "cv.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "ctm_mean", "ctm_se", "lda_mean", "lda_se",
                    "diff_mean", "diff_se"])
        for r in report.results:
            if "ctm_mean" in r:
                w.writerow([r["k"], r["ctm_mean"], r["ctm_se"], r["lda_mean"],
                            r["lda_se"], r["diff_mean"], r["diff_se"]])
    plots.plot_cv_report(report, out / "cv.png")
    click.echo(f"{'K':>4} {'CTM':>14} {'LDA':>14} {'CTM-LDA':>12}")
    for r in report.results:
        if "ctm_mean" in r:
            click.echo(f"{r['k']:>4} {r['ctm_mean']:>14.2f} {r['lda_mean']:>14.2f} "
                       f"{r['diff_mean']:>12.2f}")

    if p_grid:
        ps = [int(s) for s in p_grid.split(",")]
        rng = np.random.default_rng(seed)
        perm = rng.permutation(corpus.D)
        n_test = max(1, corpus.D // 10)
        test_idx = sorted(perm[:n_test].tolist())
        train_idx = sorted(perm[n_test:].tolist())
        from .corpus import Corpus

        train = Corpus(corpus.vocabulary, [corpus.documents[i] for i in train_idx])
        test_docs = [corpus.documents[i] for i in test_idx]
        cfg = FitConfig(k=perp_k, **base)
        ctm_model, _, _ = fit(train, cfg, threads=threads)
        lda_model, _, _ = lda_fit(train, cfg, threads=threads)
        rows = []
        for p in ps:
            cp = evaluation.predictive_perplexity(test_docs, ctm_model, p, seed=seed)
            lp = evaluation.predictive_perplexity(test_docs, lda_model, p, seed=seed)
            rows.append((p, cp, lp))
        with open(out / "perplexity.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p", "ctm_perplexity", "lda_perplexity"])
            w.writerows(rows)
        plots.plot_perplexity(ps, [r[1] for r in rows], [r[2] for r in rows],
                              out / "perplexity.png")
        click.echo(f"{'P':>4} {'CTM perp':>12} {'LDA perp':>12}")
        for p, cp, lp in rows:
            click.echo(f"{p:>4} {cp:>12.2f} {lp:>12.2f}")


@main.command("export-browser")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--states", "states_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True),
              help="Corpus directory, for document titles/years.")
@click.option("--rho", default=0.1, show_default=True)
@click.option("--samples", default=evaluation.DEFAULT_MOMENT_SAMPLES, show_default=True)
@click.option("--output", required=True, type=click.Path())
@click.pass_context
def export_browser(ctx, model_path, states_path, corpus_dir, rho, samples, output):
    """Write the self-contained browser export directory."""
    seed = ctx.obj["seed"]
    _echo_config("export-browser", {"model": model_path, "states": states_path,
                                    "rho": rho, "output": output, "seed": seed})
    model = load_model(model_path)
    if not isinstance(model, CtmModel):
        raise click.ClickException("export-browser requires a CTM model file")
    ids, states = load_states(states_path)
    lam = np.stack([s.lam for s in states])
    and_graph = graph_mod.build_graph(lam, rho, "and")
    or_graph = graph_mod.build_graph(lam, rho, "or")
    meta = {}
    if corpus_dir:
        corpus = load_corpus(corpus_dir)
        meta = {d.doc_id: (d.title, d.year) for d in corpus.documents}
    export.build_export(model, states, ids, and_graph, or_graph, output,
                        doc_meta=meta, n_samples=samples, seed=seed)
    problems = export.validate_export(output)
    if problems:
        raise click.ClickException("; ".join(problems))
    click.echo(f"export written and validated: {output}", err=True)


@main.command("validate-export")
@click.argument("path", type=click.Path(exists=True))
def validate_export_cmd(path):
    """Check an export directory against the schema and its invariants."""
    problems = export.validate_export(path)
    if problems:
        for p in problems:
            click.echo(p)
        raise click.ClickException(f"{len(problems)} violation(s)")
    click.echo("export is valid")


def entry() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.Abort:
        sys.exit(130)


if __name__ == "__main__":
    entry()
