"""Differential tests: the bytecode VM vs. the tree-walking reference evaluator.

Every corpus program runs on both evaluators; they must agree on the final
status, the canonical rendering of the result (or the failure's class), and
the transcript output. The two implementations share only the parser and the
prelude source, so agreement pins down the semantics of dispatch, closures,
non-local return, exception handling and the collection protocol.
"""

import pytest

from lumen.serialize import canonical_form
from lumen.vm import RunStatus, run_program

from corpus import PROGRAMS
from treewalk import run_reference


def _run_vm(source, seed):
    ex = run_program(source, seed=seed)
    report = {"status": ex.status.value, "output": ex.output_text}
    if ex.status is RunStatus.FINISHED:
        report["result"] = canonical_form(ex.result, ex.globals)
        report["failure"] = None
    else:
        report["result"] = None
        report["failure"] = ex.class_of(ex.failure).name
    return report


@pytest.mark.parametrize("entry", PROGRAMS, ids=lambda e: e["name"])
def test_vm_agrees_with_reference(entry):
    seed = entry.get("seed", 1)
    vm = _run_vm(entry["source"], seed)
    ref = run_reference(entry["source"], seed=seed)
    assert vm["status"] == ref["status"], f"status diverged: {vm} vs {ref}"
    assert vm["output"] == ref["output"], "transcript output diverged"
    assert vm["result"] == ref["result"], "result diverged"
    assert vm["failure"] == ref["failure"], "failure class diverged"


def test_corpus_covers_both_statuses():
    # the corpus must exercise the failure path, not just happy endings
    statuses = set()
    for entry in PROGRAMS:
        statuses.add(run_reference(entry["source"], seed=entry.get("seed", 1))["status"])
    assert statuses == {"finished", "failed"}
