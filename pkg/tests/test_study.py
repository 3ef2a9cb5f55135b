"""Preference study store and its HTTP surface."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from dcgkit.study.core import (
    DuplicateJudgmentError,
    StudyError,
    StudyStore,
    UnknownStudyError,
    create_pairwise_study,
    create_vetting_study,
)
from dcgkit.study.service import create_study_app


def videos(system: str, n: int = 4) -> dict[str, str]:
    return {f"s{i}": f"{system}/s{i}.webm" for i in range(n)}


def make_store(tmp_path, name="log.jsonl") -> StudyStore:
    ticks = iter(range(1, 10_000))
    return StudyStore(tmp_path / name, clock=lambda: float(next(ticks)))


class TestStudyConstruction:
    def test_pairwise_randomizes_sides_deterministically(self):
        study_a = create_pairwise_study(
            "s", ("alpha", videos("a")), ("beta", videos("b")), ["ann"], rng_seed=7
        )
        study_b = create_pairwise_study(
            "s", ("alpha", videos("a")), ("beta", videos("b")), ["ann"], rng_seed=7
        )
        assert [i.left_system for i in study_a.items] == [
            i.left_system for i in study_b.items
        ]
        shuffled = create_pairwise_study(
            "s", ("alpha", videos("a", 16)), ("beta", videos("b", 16)), ["ann"], rng_seed=7
        )
        assert len({i.left_system for i in shuffled.items}) == 2

    def test_pairwise_requires_matching_sample_ids(self):
        with pytest.raises(StudyError, match="mismatch"):
            create_pairwise_study(
                "s",
                ("alpha", {"x": "a/x.webm"}),
                ("beta", {"y": "b/y.webm"}),
                ["ann"],
            )

    def test_vetting_items_carry_code(self):
        study = create_vetting_study(
            "v", [("c1", "c1.webm", "<html/>")], ["ann"]
        )
        item = study.items[0]
        assert item.video_path == "c1.webm"
        assert item.html_code == "<html/>"

    def test_empty_annotators_rejected(self):
        with pytest.raises(StudyError):
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), [])


class TestStudyStore:
    def test_next_item_is_stable_until_judged(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        )
        first = store.next_item("s", "ann")
        again = store.next_item("s", "ann")
        assert first.item_id == again.item_id
        store.record_judgment("s", first.item_id, "ann", "left")
        moved = store.next_item("s", "ann")
        assert moved.item_id != first.item_id

    def test_duplicate_judgments_rejected(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        )
        item = store.next_item("s", "ann")
        store.record_judgment("s", item.item_id, "ann", "tie")
        with pytest.raises(DuplicateJudgmentError):
            store.record_judgment("s", item.item_id, "ann", "left")

    def test_judgments_survive_restart(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        )
        item = store.next_item("s", "ann")
        store.record_judgment("s", item.item_id, "ann", "right")
        reopened = StudyStore(tmp_path / "log.jsonl")
        assert reopened.next_item("s", "ann").item_id != item.item_id
        assert reopened.aggregate("s")["judgments"] == 1
        assert reopened.progress("s")["judgments"] == 1

    def test_choice_vocabulary_is_enforced(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        )
        item = store.next_item("s", "ann")
        with pytest.raises(StudyError):
            store.record_judgment("s", item.item_id, "ann", "approve")

    def test_vetting_rejections_need_a_reason(self, tmp_path):
        store = make_store(tmp_path)
        store.create(create_vetting_study("v", [("c1", "c1.webm", "")], ["ann"]))
        item = store.next_item("v", "ann")
        with pytest.raises(StudyError, match="reason"):
            store.record_judgment("v", item.item_id, "ann", "reject")
        store.record_judgment("v", item.item_id, "ann", "reject", "slides off canvas")

    def test_judgment_records_presented_side(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        )
        item = store.next_item("s", "ann")
        judgment = store.record_judgment("s", item.item_id, "ann", "left")
        assert judgment.presentation_order == item.left_system

    def test_aggregate_counts_ties_in_the_denominator(self, tmp_path):
        store = make_store(tmp_path)
        store.create(
            create_pairwise_study(
                "s", ("alpha", videos("a", 5)), ("beta", videos("b", 5)), ["ann"], rng_seed=1
            )
        )
        # alpha wins twice, beta wins twice, one tie.
        script = ["alpha", "alpha", "beta", "beta", "tie"]
        for preferred in script:
            item = store.next_item("s", "ann")
            if preferred == "tie":
                choice = "tie"
            else:
                choice = "left" if item.left_system == preferred else "right"
            store.record_judgment("s", item.item_id, "ann", choice)
        tally = {
            row["system"]: row for row in store.aggregate("s")["systems"]
        }
        assert tally["alpha"]["wins"] == 2
        assert tally["alpha"]["ties"] == 1
        assert tally["alpha"]["win_rate"] == pytest.approx(2 / 5)
        assert tally["beta"]["win_rate"] == pytest.approx(2 / 5)

    def test_unknown_study_raises(self, tmp_path):
        store = make_store(tmp_path)
        with pytest.raises(UnknownStudyError):
            store.next_item("ghost", "ann")

    def test_duplicate_study_id_rejected(self, tmp_path):
        store = make_store(tmp_path)
        study = create_pairwise_study("s", ("a", videos("a")), ("b", videos("b")), ["ann"])
        store.create(study)
        with pytest.raises(StudyError):
            store.create(study)


class TestStudyService:
    @pytest.fixture()
    def client(self, tmp_path):
        return TestClient(create_study_app(make_store(tmp_path)))

    def create_study(self, client, study_id="s1") -> dict:
        response = client.post(
            "/study/v1/studies/pairwise",
            json={
                "study_id": study_id,
                "system_a": "alpha",
                "videos_a": videos("a"),
                "system_b": "beta",
                "videos_b": videos("b"),
                "annotators": ["ann"],
                "rng_seed": 3,
            },
        )
        assert response.status_code == 201
        return response.json()

    def test_health_and_listing(self, client):
        assert client.get("/study/v1/health").json()["status"] == "ok"
        self.create_study(client)
        listing = client.get("/study/v1/studies").json()["studies"]
        assert [s["id"] for s in listing] == ["s1"]

    def test_full_annotation_flow(self, client):
        self.create_study(client)
        judged = 0
        while True:
            step = client.get("/study/v1/studies/s1/next", params={"annotator": "ann"}).json()
            if step["done"]:
                break
            response = client.post(
                "/study/v1/studies/s1/judgments",
                json={
                    "item_id": step["item"]["item_id"],
                    "annotator_id": "ann",
                    "choice": "left",
                },
            )
            assert response.status_code == 201
            judged += 1
        assert judged == 4
        aggregate = client.get("/study/v1/studies/s1/aggregate").json()
        assert aggregate["judgments"] == 4

    def test_duplicate_judgment_is_409(self, client):
        self.create_study(client)
        step = client.get("/study/v1/studies/s1/next", params={"annotator": "ann"}).json()
        payload = {
            "item_id": step["item"]["item_id"],
            "annotator_id": "ann",
            "choice": "tie",
        }
        assert client.post("/study/v1/studies/s1/judgments", json=payload).status_code == 201
        assert client.post("/study/v1/studies/s1/judgments", json=payload).status_code == 409

    def test_unknown_study_is_404(self, client):
        assert client.get("/study/v1/studies/ghost").status_code == 404
        assert (
            client.get("/study/v1/studies/ghost/next", params={"annotator": "a"}).status_code
            == 404
        )

    def test_bad_choice_is_400(self, client):
        self.create_study(client)
        step = client.get("/study/v1/studies/s1/next", params={"annotator": "ann"}).json()
        response = client.post(
            "/study/v1/studies/s1/judgments",
            json={
                "item_id": step["item"]["item_id"],
                "annotator_id": "ann",
                "choice": "banana",
            },
        )
        assert response.status_code == 400

    def test_duplicate_study_is_400(self, client):
        self.create_study(client)
        response = client.post(
            "/study/v1/studies/pairwise",
            json={
                "study_id": "s1",
                "system_a": "alpha",
                "videos_a": videos("a"),
                "system_b": "beta",
                "videos_b": videos("b"),
                "annotators": ["ann"],
            },
        )
        assert response.status_code == 400

    def test_media_mount_serves_files(self, tmp_path):
        media = tmp_path / "media"
        media.mkdir()
        (media / "clip.webm").write_bytes(b"\x1aE\xdf\xa3")
        client = TestClient(create_study_app(make_store(tmp_path), media_root=media))
        response = client.get("/study/media/clip.webm")
        assert response.status_code == 200
