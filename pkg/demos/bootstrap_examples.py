"""Bootstrap a few-shot example set from self-verified attempts, then reuse it.

Runs the whole learn-then-evaluate pipeline offline: scripted backends stand
in for the model (the evaluation one simply answers from the problem payload,
since the point here is the plumbing, not the reasoning).
"""

import tempfile
from pathlib import Path

from codeloop import harness
from codeloop.backends import ReplayBackend
from codeloop.harness import RunConfig
from codeloop.learn import LearnConfig
from codeloop.tasks.base import Problem, dump_problems
from codeloop.workspace import ScriptedWorkspace

TRAIN = [
    Problem(id="t1", prompt="What is 2 + 3?", payload={"answer": "5"}, task="exact"),
    Problem(id="t2", prompt="Reverse the string 'abc'.", payload={"answer": "cba"}, task="exact"),
]
EVAL = [
    Problem(id="p1", prompt="What is 2 + 2?", payload={"answer": "4"}, task="exact"),
    Problem(id="p2", prompt="What is 10 * 4?", payload={"answer": "40"}, task="exact"),
    Problem(id="p3", prompt="Reverse the string 'dog'.", payload={"answer": "god"}, task="exact"),
]


def returned(answer: str) -> str:
    return f"<turn>\nI can answer directly.\n<return>{answer}</return>\n</turn>"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        dump_problems(TRAIN, tmp_path / "train.jsonl")
        dump_problems(EVAL, tmp_path / "eval.jsonl")

        config = RunConfig(
            task="exact",
            method="bfl",
            output_dir=str(tmp_path / "run"),
            problems_path=str(tmp_path / "eval.jsonl"),
            train_path=str(tmp_path / "train.jsonl"),
            examples_path=str(tmp_path / "examples.json"),
            learn=LearnConfig(n_train=2, attempts=2, keep=2, k_examples=1),
        )

        # learning visits each training problem twice, in order
        learn_script = [(returned(p.payload["answer"]), 40) for p in TRAIN for _ in range(2)]

        example_set = harness.learn_examples(
            config,
            backend_factory=lambda _problem: ReplayBackend(script=list(learn_script)),
            workspace_factory=ScriptedWorkspace,
        )
        example_set.save(config.examples_path)
        print(f"learned {len(example_set.examples)} example(s) via {example_set.method}:")
        for ex in example_set.examples:
            print(f"  from {ex.problem_id}, score {ex.score}")

        report = harness.run(
            config,
            backend_factory=lambda problem: ReplayBackend(
                script=[(returned(problem.payload["answer"]), 30)]
            ),
            workspace_factory=ScriptedWorkspace,
        )
        print(f"\neval mean score: {report['mean_score']}  outcomes: {report['outcomes']}")

        traces = harness.read_traces(Path(config.output_dir) / "traces.jsonl")
        first_user = next(t for t in traces[0].conversation if t.role == "user")
        head = "\n".join(first_user.content.splitlines()[:12])
        print("\nfirst evaluation prompt begins with the learned example:\n")
        print(head)


if __name__ == "__main__":
    main()
