"""Runs the CLI end to end and validates every JSON artifact against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

FIXTURES = pathlib.Path(__file__).parent / "fixtures" / "label"


def load_schemas(root):
    schemas = {p.name: json.loads(p.read_text()) for p in root.glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items())
    return schemas, registry


def check(schemas, registry, name, doc):
    jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(doc)


def run(cli, *args):
    out = subprocess.run([cli, *map(str, args)], check=True, capture_output=True, text=True)
    return out.stdout


def main():
    cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas, registry = load_schemas(schema_dir)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        run(cli, "synth", "gen", "--seeds", "0..1", "--out", tmp / "scenes")
        scene = tmp / "scenes" / "scene_000000"
        plan = json.loads(run(cli, "grasp", "--depth", scene / "depth.png", "--mask", scene / "mask.png",
                              "--intrinsics", scene / "intrinsics.json"))
        check(schemas, registry, "grasp_plan.schema.json", plan)

        run(cli, "synth", "trial", "--scenes", tmp / "scenes", "--report", tmp / "trial.json")
        check(schemas, registry, "trial_report.schema.json", json.loads((tmp / "trial.json").read_text()))

        run(cli, "label", "--in", FIXTURES, "--out", tmp / "label", "--splits", "0.34,0.33,0.33")
        lines = []
        for split in ("train", "val", "test"):
            for line in (tmp / "label" / f"{split}.jsonl").read_text().splitlines():
                check(schemas, registry, "manifest_entry.schema.json", json.loads(line))
                lines.append(line)
        (tmp / "all.jsonl").write_text("\n".join(lines) + "\n")

        for extra in ([], ["--macro"]):
            report = json.loads(run(cli, "eval", "--manifest", tmp / "all.jsonl", "--pred", tmp / "label", *extra))
            check(schemas, registry, "eval_report.schema.json", report)
    print("all CLI outputs match their schemas")


if __name__ == "__main__":
    main()
