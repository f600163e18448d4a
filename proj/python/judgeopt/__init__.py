"""Prompt optimization and cross-judge evaluation toolkit."""

try:
    from judgeopt._judgeopt import (
        Run,
        __version__,
        baseline_prompt_text,
        bootstrap_se,
        ensemble_min,
        format_delta,
        format_percent,
        format_se,
        judge_rubric_text,
        make_synthetic_corpus_file,
        parse_score,
        prompt_content_id,
        split_corpus_file,
        to_percent,
    )
except ImportError:
    # Build-tree layout: the extension sits on sys.path as a top-level module.
    from _judgeopt import (
        Run,
        __version__,
        baseline_prompt_text,
        bootstrap_se,
        ensemble_min,
        format_delta,
        format_percent,
        format_se,
        judge_rubric_text,
        make_synthetic_corpus_file,
        parse_score,
        prompt_content_id,
        split_corpus_file,
        to_percent,
    )

__all__ = [
    "Run",
    "__version__",
    "baseline_prompt_text",
    "bootstrap_se",
    "ensemble_min",
    "format_delta",
    "format_percent",
    "format_se",
    "judge_rubric_text",
    "make_synthetic_corpus_file",
    "parse_score",
    "prompt_content_id",
    "split_corpus_file",
    "to_percent",
]
