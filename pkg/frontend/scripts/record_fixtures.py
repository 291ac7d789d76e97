"""Record API fixtures for the dashboard tests.

Seeds a demo data set into a temporary directory, drives the HTTP service
in-process, and freezes the JSON responses (plus the latest wound mask, its
boundary, and the CLI's area computation for the same mask) under
frontend/tests/fixtures/. The dashboard test suite replays these files and
never needs a running service.

Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import io
import itertools
import json
import tempfile
from pathlib import Path

import numpy as np
from click.testing import CliRunner
from fastapi.testclient import TestClient

from telewound.cli import main as cli_main
from telewound.demo import seed_demo
from telewound.imaging import decode_mask_png
from telewound.pipeline import mask_boundary
from telewound.service import create_app, load_config

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

RO_SPEC = {"ax": 10.0, "ay": 20.0, "bx": 10.0, "by": 220.0, "known_length_mm": 50.0}

SCRUBBED_TOKEN = "fixture-token"
SCRUBBED_EXPIRY = "2026-08-21T12:00:00Z"


def encode_rle(mask: np.ndarray) -> dict:
    """Alternating run lengths over the row-major bitmap, starting with a
    zero-run (a leading 0 marks a bitmap that begins with ones)."""
    flat = np.asarray(mask, dtype=np.uint8).ravel().tolist()
    runs: list[int] = []
    if flat and flat[0] == 1:
        runs.append(0)
    for _, group in itertools.groupby(flat):
        runs.append(sum(1 for _ in group))
    return {"width": int(mask.shape[1]), "height": int(mask.shape[0]), "runs": runs}


def write(name: str, payload: dict) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(Path.cwd())}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        seed_demo(tmp)
        config = load_config(Path(tmp) / "config.json")
        client = TestClient(create_app(config))

        login = client.post(
            "/api/v1/auth/login", json={"username": "lang", "password": "lang-demo"}
        ).json()
        token = login["token"]
        client.headers["authorization"] = f"Bearer {token}"
        clinician_id = login["principal_id"]
        write("login.json", {**login, "token": SCRUBBED_TOKEN, "expires_at": SCRUBBED_EXPIRY})

        patients = client.get("/api/v1/clinician/patients").json()
        write("patients.json", patients)

        # The busiest wound makes the richest gallery/trajectory fixtures.
        overview = None
        wound = None
        for row in patients["patients"]:
            candidate = client.get(f"/api/v1/patients/{row['id']}/overview").json()
            for entry in candidate["wounds"]:
                if wound is None or entry["documentation_count"] > wound["documentation_count"]:
                    overview, wound = candidate, entry
        assert overview is not None and wound is not None, "demo seeded no wounds"
        write("overview.json", overview)

        gallery = client.get(f"/api/v1/wounds/{wound['id']}/gallery").json()
        write("gallery.json", gallery)

        write(
            "trajectory_wound.json",
            client.get(f"/api/v1/wounds/{wound['id']}/trajectory").json(),
        )
        write(
            "trajectory_general.json",
            client.get(f"/api/v1/patients/{overview['id']}/trajectory/general").json(),
        )
        write(
            "slots.json",
            client.get(f"/api/v1/appointments/slots?clinician_id={clinician_id}").json(),
        )
        write("help_gallery.json", client.get("/api/v1/help/gallery").json())

        latest = gallery["items"][-1]
        mask_png = client.get(f"/api/v1/images/{latest['mask_blob']}").content
        mask = decode_mask_png(mask_png)
        write("mask.json", encode_rle(mask))
        write("boundary.json", encode_rle(mask_boundary(mask)))

        ro_response = client.post(
            f"/api/v1/documentations/{latest['documentation_id']}/ro-annotation",
            json={"wound_id": wound["id"], "ro": RO_SPEC},
        )
        ro_response.raise_for_status()
        write("ro_response.json", ro_response.json())

        runner = CliRunner()
        with runner.isolated_filesystem():
            Path("mask.png").write_bytes(mask_png)
            ro_arg = "{ax},{ay},{bx},{by},{known_length_mm}".format(**RO_SPEC)
            result = runner.invoke(
                cli_main, ["area", "--mask", "mask.png", "--ro", ro_arg, "--json"]
            )
            assert result.exit_code == 0, result.output
            area = json.loads(result.output)
        write("area_cli.json", {**area, "ro": RO_SPEC})


if __name__ == "__main__":
    main()
