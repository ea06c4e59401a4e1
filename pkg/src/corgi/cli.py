"""Command-line entry point.

Verbs: repl | prove | gen-traces | train | eval | serve | kb-stats.
Flags override the JSON config file, which overrides built-in defaults.
Exit codes: 0 success, 1 task failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

from .config import AppConfig, resolve_config
from .dialog import ParseFailure, start_session, user_answer
from .errors import CorgiError
from .logic import parse_term_text
from .softprove import OracleGuide, SoftProveConfig, oracle_prove, soft_prove


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corgi",
        description="Commonsense reasoning by instruction: prove goals over "
                    "a Prolog-like knowledge base, learn proof guidance from "
                    "traces, and hold knowledge-evoking dialogs.")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--show-config", action="store_true",
                        help="print the effective configuration and exit")
    sub = parser.add_subparsers(dest="verb")

    def common(p):
        p.add_argument("--kb", dest="kb_path")
        p.add_argument("--types", dest="types_path")
        p.add_argument("--seed", type=int, dest="seed")
        return p

    repl = common(sub.add_parser("repl", help="interactive dialog loop"))
    repl.add_argument("--mode", choices=["oracle", "soft"], default="oracle")
    repl.add_argument("--model", dest="model_path")
    repl.add_argument("--n", type=int, dest="n")

    prove = common(sub.add_parser("prove", help="prove a single query"))
    prove.add_argument("--query", required=True)
    prove.add_argument("--oracle", action="store_true")
    prove.add_argument("--model", dest="model_path")
    prove.add_argument("--k", type=int, dest="k")
    prove.add_argument("--t1", type=float, dest="t1")
    prove.add_argument("--t2", type=float, dest="t2")
    prove.add_argument("--max-depth", type=int, dest="max_depth")

    gen = common(sub.add_parser("gen-traces", help="build a training corpus"))
    gen.add_argument("--count", type=int, default=2000)
    gen.add_argument("--out", required=True)

    train_p = sub.add_parser("train", help="train the proof guide")
    train_p.add_argument("--traces", required=True)
    train_p.add_argument("--out", required=True)
    train_p.add_argument("--epochs", type=int, default=100)
    train_p.add_argument("--lr", type=float, default=0.1)
    train_p.add_argument("--batch-size", type=int, default=8)
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--embeddings", dest="embeddings_path")
    train_p.add_argument("--kb", dest="kb_path")
    train_p.add_argument("--types", dest="types_path")
    train_p.add_argument("--m1", type=int)
    train_p.add_argument("--m2", type=int)
    train_p.add_argument("--hidden", type=int)
    train_p.add_argument("--report", help="directory for loss log and curve")

    eval_p = common(sub.add_parser("eval", help="replay scripted dialogs"))
    eval_p.add_argument("--scripts", required=True)
    eval_p.add_argument("--tasks",
                        help="command dataset to validate and summarize")
    eval_p.add_argument("--mode", choices=["soft", "oracle", "nofeedback"],
                        default="oracle")
    eval_p.add_argument("--model", dest="model_path")
    eval_p.add_argument("--n", type=int, dest="n")
    eval_p.add_argument("--report", required=True,
                        help="output directory for report + figures")

    serve = common(sub.add_parser("serve", help="run the session HTTP API"))
    serve.add_argument("--listen", dest="listen_address")
    serve.add_argument("--mode", choices=["oracle", "soft"], default="oracle")
    serve.add_argument("--model", dest="model_path")
    serve.add_argument("--store", dest="session_store_path")
    serve.add_argument("--n", type=int, dest="n")
    serve.add_argument("--ui", help="directory with the built web client "
                                    "to serve at /")

    common(sub.add_parser("kb-stats", help="clause counts by provenance/domain"))
    return parser


_CONFIG_KEYS = ("kb_path", "types_path", "embeddings_path", "model_path", "n",
                "k", "t1", "t2", "max_depth", "listen_address",
                "session_store_path", "seed")


def _config_from_args(args) -> AppConfig:
    flags = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return resolve_config(flags, args.config)


def _soft_cfg(config: AppConfig) -> SoftProveConfig:
    return SoftProveConfig(k=config.k, t1=config.t1, t2=config.t2,
                           max_depth=config.max_depth,
                           max_steps=config.max_steps)


def _guide_factory(config: AppConfig, mode: str, base_kb):
    if mode in ("oracle", "nofeedback"):
        return lambda kb: OracleGuide()
    from .model import ModelParams, NeuralGuide
    if not config.model_path:
        raise CorgiError("soft mode needs --model (a trained checkpoint)")
    params = ModelParams.load(config.model_path,
                              kb_fingerprint=base_kb.fingerprint())
    return lambda kb: NeuralGuide(params, kb)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.verb is None and not args.show_config:
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = _config_from_args(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.show_config:
        print(config.to_json())
        return 0
    if config.lexicon_path:
        from .nlparse import lexicon_from_dir, set_default_lexicon
        set_default_lexicon(lexicon_from_dir(config.lexicon_path))
    try:
        handler = {
            "repl": _cmd_repl, "prove": _cmd_prove, "gen-traces": _cmd_gen,
            "train": _cmd_train, "eval": _cmd_eval, "serve": _cmd_serve,
            "kb-stats": _cmd_kb_stats,
        }[args.verb]
        return handler(args, config)
    except CorgiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_prove(args, config: AppConfig) -> int:
    kb = config.load_kb()
    goal = parse_term_text(args.query)
    cfg = _soft_cfg(config)
    if args.oracle or not config.model_path:
        result = oracle_prove(kb, goal, cfg)
    else:
        guide = _guide_factory(config, "soft", kb)(kb)
        result = soft_prove(kb, guide, goal, cfg)
    if not result:
        print(f"no proof ({result.reason})")
        return 1
    print(result.proof.render(result.bindings))
    return 0


def _cmd_gen(args, config: AppConfig) -> int:
    from .traces import build_corpus
    kb = config.load_kb()
    corpus = build_corpus(kb, args.count, config.seed,
                          max_depth=config.max_depth)
    corpus.save(args.out)
    print(f"wrote {len(corpus.traces)} traces to {args.out}")
    return 0


def _cmd_train(args, config: AppConfig) -> int:
    from .model import ModelDims, TrainConfig, rule_accuracy, train
    from .traces import TraceCorpus
    corpus = TraceCorpus.load(args.traces)
    kb = config.load_kb()
    if kb.fingerprint() != corpus.kb_fingerprint:
        print("error: trace corpus was generated from a different KB",
              file=sys.stderr)
        return 1
    dims = ModelDims()
    if args.m1:
        dims.m1 = args.m1
    if args.m2:
        dims.m2 = args.m2
    if args.hidden:
        dims.hidden = args.hidden
    cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                      batch_size=args.batch_size, seed=args.seed,
                      embedding_init=config.embeddings_path)
    params, log = train(corpus, cfg, n_rules=kb.next_id, dims=dims,
                        log_every=max(1, args.epochs // 10))
    params.save(args.out)
    accuracy = rule_accuracy(params, corpus)
    print(f"saved checkpoint to {args.out}")
    print(f"final mean loss {log[-1]:.4f}; teacher-forced rule accuracy "
          f"{accuracy:.1%}")
    if args.report:
        _write_training_report(args.report, log)
    return 0


def _write_training_report(outdir, log) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "loss.tsv", "w", encoding="utf-8") as fh:
        fh.write("epoch\tmean_loss\n")
        for epoch, value in enumerate(log, start=1):
            fh.write(f"{epoch}\t{value:.6f}\n")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(1, len(log) + 1), log)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean trace loss")
    ax.set_title("Training loss")
    fig.tight_layout()
    fig.savefig(out / "loss_curve.png", dpi=150)
    plt.close(fig)
    print(f"wrote {out / 'loss.tsv'} and {out / 'loss_curve.png'}")


def _cmd_eval(args, config: AppConfig) -> int:
    from .dataset import (dataset_stats, evaluate, load_dataset, load_scripts,
                          write_report)
    kb = config.load_kb()
    n = 0 if args.mode == "nofeedback" else config.n
    guide_factory = _guide_factory(config, args.mode, kb)
    scripts = load_scripts(args.scripts, n=max(n, 3))
    report = evaluate(
        scripts,
        lambda cmd: start_session(kb, cmd, guide_factory=guide_factory,
                                  cfg=_soft_cfg(config), n=n))
    if args.tasks:
        records = load_dataset(args.tasks)
        stats = dataset_stats(records)
        print(f"task dataset: {stats['total']} commands "
              f"({stats.get('restricted', 0)} restricted, "
              f"{stats.get('everyday', 0)} everyday)")
    paths = write_report(report, args.report)
    print(f"success rate {report.success_rate:.1%} over "
          f"{len(report.outcomes)} tasks; report in {paths['report']}")
    mismatched = [o.task_id for o in report.outcomes if not o.matched]
    if mismatched:
        print(f"outcome mismatches: {', '.join(mismatched)}")
        return 1
    return 0


def _cmd_repl(args, config: AppConfig) -> int:
    kb = config.load_kb()
    guide_factory = _guide_factory(config, args.mode, kb)
    print("corgi ready. Give an if-then-because command (empty line quits).")
    session = None
    while True:
        try:
            prompt = "you> " if session is None else "answer> "
            line = input(prompt)
        except EOFError:
            break
        line = line.strip()
        if not line:
            break
        try:
            if session is None:
                session, action = start_session(
                    kb, line, guide_factory=guide_factory,
                    cfg=_soft_cfg(config), n=config.n)
            else:
                action = user_answer(session, line)
        except ParseFailure as exc:
            print(f"could not parse that command: {exc}")
            continue
        print(f"corgi> {action.text}")
        if action.type != "ask":
            if action.type == "succeed":
                print("proof:")
                print(session.result.proof.render(session.result.bindings))
                for p in session.presumptions:
                    print(f"presumption ({p.kind}): {p.rendered}")
            session = None
    return 0


def _cmd_serve(args, config: AppConfig) -> int:
    import uvicorn
    from .server import create_app
    app = create_app(config, mode=args.mode, ui_dir=args.ui)
    host, _, port = config.listen_address.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000),
                log_level="warning")
    return 0


def _cmd_kb_stats(args, config: AppConfig) -> int:
    kb = config.load_kb()
    by_prov = Counter(c.provenance for c in kb.clauses)
    by_domain = Counter(c.domain for c in kb.clauses)
    facts = sum(1 for c in kb.clauses if c.is_fact)
    print(f"clauses: {len(kb)} ({facts} facts, {len(kb) - facts} rules)")
    print("by provenance:")
    for key, count in sorted(by_prov.items()):
        print(f"  {key}: {count}")
    print("by domain:")
    for key, count in sorted(by_domain.items()):
        print(f"  {key}: {count}")
    print(f"predicates: {len(kb.predicates())}")
    print(f"fingerprint: {kb.fingerprint()[:16]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
