"""Acceptance suite: one test per release criterion, each at its stated
tolerance. Run with `pytest tests/test_acceptance.py -v -s` to get one
printed line per criterion; all criteria run against packaged fixtures and
need no UI build.
"""

import json
import math
import random
import string
import time
from datetime import date
from fractions import Fraction

from certlab import analytics, certid, fuzzymatch as fm, vulnmap
from certlab.certid import IdCandidate, Source
from certlab.ingest import CertRecord, check_conversion
from certlab.refgraph import build_graph, impacted_by
from certlab.snapshot import (
    FulltextIndex,
    diff,
    load_artifact_texts,
    load_snapshot,
    make_snapshot,
    replay_cve_sets,
    replay_reference_sets,
)
from certlab.vulnmap import CpeEntry, NvdDataset, candidate_cpes, match_certificate

import oracles
from conftest import CORPUS_DIR, make_record
from test_certid import TABLE_EXAMPLES
from test_refgraph import oracle_graph, random_corpus

ALPHABET = string.ascii_lowercase[:6] + " .0"


def ok(message: str) -> None:
    print(f"PASS: {message}")


class TestIndelCriteria:
    def test_indel_oracle_equivalence_10k_pairs(self):
        rng = random.Random(20240601)
        start = time.monotonic()
        for _ in range(10_000):
            a = "".join(rng.choices(ALPHABET, k=rng.randint(0, 12)))
            b = "".join(rng.choices(ALPHABET, k=rng.randint(0, 12)))
            assert fm.indel_distance(a, b) == oracles.indel_distance_dp(a, b)
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"
        ok(f"indel oracle equivalence on 10,000 pairs in {elapsed:.2f}s")

    def test_indel_metric_laws_1000_triples(self):
        rng = random.Random(20240602)
        violations = 0
        for _ in range(1_000):
            a, b, c = (
                "".join(rng.choices(ALPHABET, k=rng.randint(0, 12))) for _ in range(3)
            )
            dab = fm.indel_distance(a, b)
            if dab != fm.indel_distance(b, a):
                violations += 1
            if (dab == 0) != (a == b):
                violations += 1
            if dab > fm.indel_distance(a, c) + fm.indel_distance(c, b):
                violations += 1
        assert violations == 0
        ok("metric laws (symmetry, identity, triangle) on 1,000 triples: zero violations")


class TestPartialRatioCriteria:
    def test_partial_ratio_correctness(self):
        rng = random.Random(20240603)
        words = ["acme", "secure", "chip", "2.0", "firewall", "v5.1", "platform", "x9"]
        base = rng.sample(words, k=5)
        other = "secure platform 2.0 acme"
        reference = fm.partial_token_sort_ratio(" ".join(base), other)
        for _ in range(500):
            shuffled = base[:]
            rng.shuffle(shuffled)
            assert fm.partial_token_sort_ratio(" ".join(shuffled), other) == reference

        for _ in range(300):
            a = " ".join(rng.choices(words, k=rng.randint(0, 6)))
            b = " ".join(rng.choices(words, k=rng.randint(0, 6)))
            assert fm.partial_token_sort_ratio(a, b) == oracles.partial_token_sort_oracle(a, b)
            assert fm.partial_token_set_ratio(a, b) == oracles.partial_token_set_oracle(a, b)
        ok("partial ratios: 500 permutations invariant, 300 pairs equal the alignment oracle")


class TestCertificateIdCriteria:
    def test_certificate_id_suite(self, pipeline):
        # all seventeen reference IDs parse, canonicalize, and round-trip
        for scheme, raw in sorted(TABLE_EXAMPLES.items()):
            cid = certid.canonicalize(raw, scheme)
            assert cid.canonical == raw
            assert certid.canonicalize(cid.canonical, scheme) == cid

        # labeled synthetic corpus: precision of assigned IDs
        labels = json.loads((CORPUS_DIR / "id_labels.json").read_text(encoding="utf-8"))
        assignments = json.loads(pipeline["ids"].read_text(encoding="utf-8"))["assignments"]
        assigned = correct = 0
        for key, entry in assignments.items():
            if entry is None:
                continue
            assigned += 1
            if labels[key]["canonical"] == entry["canonical"]:
                correct += 1
        assert assigned >= 50
        precision = correct / assigned
        assert precision >= 0.98, f"precision {precision:.4f}"

        # hand-computed weighted merge: contents+filename (2.0) beats frontpage (1.5)
        front = IdCandidate("BSI-DSZ-CC-1111-2020", "BSI-DSZ-CC-1111-2020", "DE", Source.FRONTPAGE, Fraction(1))
        c1 = IdCandidate("BSI-DSZ-CC-2222-2020", "BSI-DSZ-CC-2222-2020", "DE", Source.CONTENTS, Fraction(1))
        c2 = IdCandidate("BSI-DSZ-CC-2222-2020", "BSI-DSZ-CC-2222-2020", "DE", Source.FILENAME, Fraction(1))
        assert certid.assign_id([front, c1, c2]).canonical == "BSI-DSZ-CC-2222-2020"
        ok(
            f"certificate IDs: 17/17 reference forms round-trip, corpus precision "
            f"{precision:.3f} over {assigned} assigned, weighted merge picks hand-computed winner"
        )


def single_cpe_nvd(uri: str) -> NvdDataset:
    return NvdDataset(cpes=(CpeEntry.parse(uri),), cves=())


class TestCpeCriteria:
    CANDIDATE_TABLE = [
        # (extracted versions, cpe vendor, product, version, aliases?, wildcard flag, expected kept)
        ({"5.1.2"}, "acme_networks", "firewall", "5.1", None, False, True),
        ({"5.1.2"}, "acme_networks", "firewall", "5.2", None, False, False),
        ({"5.1"}, "acme_networks", "abc", "5.1", None, False, False),
        ({"5.1"}, "nxp_semiconductors", "crypto_library", "5.1", None, False, False),
        ({"5.1"}, "nxp_semiconductors", "crypto_library", "5.1", "bundled", False, True),
        ({"5.1"}, "acme_networks", "abcd", "5.1", None, False, True),
        ({"73.04"}, "acme_networks", "firewall", "73.04", None, False, True),
        ({"5.1"}, "acme_networks", "firewall", "-", None, False, False),
        ({"5.1"}, "acme_networks", "firewall", "-", None, True, True),
        ({"5.1"}, "acme_networks", "firewall", "*", None, False, False),
        ({"5.1"}, "acme_networks", "firewall", "*", None, True, True),
        ({"5.1"}, "acme_networks", "firewall", "5", None, False, True),
        ({"5"}, "acme_networks", "firewall", "5.1", None, False, False),
        ({"5.01"}, "acme_networks", "firewall", "5.1", None, False, True),
        ({"1.10"}, "acme_networks", "firewall", "1.1", None, False, False),
        ({"1.1.9"}, "acme_networks", "firewall", "1.1", None, False, True),
        ({"10.2"}, "acme_networks", "firewall", "1.2", None, False, False),
        (set(), "acme_networks", "firewall", "5.1", None, False, False),
        ({"5.1", "6.0"}, "acme_networks", "firewall", "6.0", None, False, True),
        ({"5.1"}, "acme_corporation", "firewall", "5.1", None, False, False),
    ]

    def test_cpe_candidate_filters(self):
        record = make_record(key="t", title="Acme Networks Firewall", vendor="Acme Networks")
        nxp_record = make_record(key="n", title="NXP Crypto Library", vendor="NXP")
        bundled = vulnmap.load_vendor_aliases()
        for i, (versions, vendor, product, version, aliases, wildcard, expected) in enumerate(
            self.CANDIDATE_TABLE
        ):
            uri = f"cpe:2.3:a:{vendor}:{product}:{version}:*:*:*:*:*:*:*"
            nvd = single_cpe_nvd(uri)
            rec = nxp_record if vendor.startswith("nxp") else record
            kept = candidate_cpes(
                rec,
                versions,
                nvd,
                aliases=bundled if aliases == "bundled" else None,
                allow_wildcard_version=wildcard,
            )
            assert bool(kept) is expected, f"row {i}: {versions} vs {uri}"
        assert len(self.CANDIDATE_TABLE) == 20

        # anti-monotone match set across five thresholds
        title = "Acme Secure Firewall Suite 5.1"
        rec = make_record(key="m", title=title, vendor="Acme")
        uris = [
            "cpe:2.3:a:acme:secure_firewall_suite:5.1:*:*:*:*:*:*:*",
            "cpe:2.3:a:acme:firewall_suite:5.1:*:*:*:*:*:*:*",
            "cpe:2.3:a:acme:kryptomall:5.1:*:*:*:*:*:*:*",
            "cpe:2.3:a:acme:payroll_reporting:5.1:*:*:*:*:*:*:*",
        ]
        nvd = NvdDataset(cpes=tuple(CpeEntry.parse(u) for u in uris), cves=())
        candidates = candidate_cpes(rec, {"5.1"}, nvd)
        previous: set | None = None
        sizes = []
        for threshold in (100.0, 92.0, 85.0, 60.0, 0.0):
            matched = {u for u, _ in match_certificate(rec, candidates, nvd, threshold).matched_cpes}
            if previous is not None:
                assert previous <= matched
            previous = matched
            sizes.append(len(matched))
        assert sizes[0] < sizes[-1]
        ok("CPE candidate filters: 20-case table exact, match set anti-monotone over 5 thresholds")

    def test_cpe_matching_precision(self):
        rows = []
        for line in (CORPUS_DIR.parent / "cpe_labels.txt").read_text(encoding="utf-8").splitlines():
            title, vendor, uri, label = line.rsplit("|", 3)
            rows.append((title, vendor, uri, int(label)))
        assert len(rows) == 100
        aliases = vulnmap.load_vendor_aliases()
        tp = fp = 0
        for title, vendor, uri, label in rows:
            record = CertRecord(
                record_key="x", scheme="DE", category="", title=title, vendor=vendor,
                cert_date=date(2015, 1, 1), expiry_date=None, status="active", declared_eal=None,
            )
            nvd = single_cpe_nvd(uri)
            candidates = candidate_cpes(record, vulnmap.extract_versions(title), nvd, aliases=aliases)
            predicted = bool(match_certificate(record, candidates, nvd).matched_cpes)
            if predicted and label:
                tp += 1
            elif predicted and not label:
                fp += 1
        precision = tp / (tp + fp)
        assert precision >= 0.85, f"precision {precision:.4f}"
        ok(f"CPE matching precision {precision:.3f} on the 100-pair annotated fixture (threshold 92)")


def dense_line(n: int = 21) -> str:
    return ("abcdefghij0123456789x" * 3)[:n]


class TestConversionCriteria:
    def build_fixture(self, check: int, at_threshold: bool):
        """Texts pinned exactly at, or one unit below, each check threshold,
        with every other metric held comfortably above its own."""
        good = dense_line(40)
        if check == 1:
            lines = [good] * (30 if at_threshold else 29)
            return "\n".join(lines), 5000
        if check == 2:
            return "\n".join([good] * 40), 1000 if at_threshold else 999
        if check == 3:
            width = 20 if at_threshold else 19
            return "\n".join([dense_line(width)] * 40), 5000
        if check == 4:
            varied = 15 if at_threshold else 14
            garbled = "a " * 20 + "a"  # even-indexed characters all identical
            lines = [good] * varied + [garbled] * (40 - varied)
            return "\n".join(lines), 5000
        # check 5: alnum ratio exactly 0.5 (or one character short of it)
        half = "x" * 20 + "." * 20
        dense = "a0b1c2d3e4f5g6h7i8j9" * 2
        lines = [half] * 40 + [dense]
        text = "\n".join(lines)
        assert len(text) == 1680
        if not at_threshold:
            text = text.replace(dense, "a0b1c2d3e4f5g6h7i8j" + "." * 21, 1)
        return text, 5000

    def test_conversion_boundary_fixtures(self):
        for check in (1, 2, 3, 4, 5):
            at_text, at_size = self.build_fixture(check, at_threshold=True)
            below_text, below_size = self.build_fixture(check, at_threshold=False)
            at_quality = check_conversion(at_text, at_size)
            below_quality = check_conversion(below_text, below_size)
            assert at_quality.failed_checks == frozenset(), f"check {check} at-threshold: {at_quality}"
            assert below_quality.failed_checks == frozenset({check}), (
                f"check {check} below-threshold: {below_quality.failed_checks}"
            )
            assert not at_quality.malformed and below_quality.malformed
        ok("conversion checks: 10 boundary fixtures classify exactly, strict-below semantics")


class TestGraphCriteria:
    def test_graph_oracle_equivalence(self):
        for seed in range(10):
            rng = random.Random(seed)
            id_index, texts = random_corpus(rng, rng.randint(2, 12))
            graph = build_graph(id_index, texts)
            assert graph.edges == oracle_graph(id_index, texts)

        rng = random.Random(99)
        id_index, texts = random_corpus(rng, 12)
        graph = build_graph(id_index, texts)
        node = sorted(graph.nodes)[0]
        previous: set = set()
        for depth in range(1, 7):
            current = impacted_by(graph, {node}, depth=depth)
            assert previous <= current
            previous = current
        ok("reference graph equals substring oracle on 10 corpora <= 12 certs; depth-monotone")

    def test_star_fixture_returns_all_120_referencers_fast(self):
        center = "BSI-DSZ-CC-0999-2019"
        id_index = {center: "chip"}
        texts = {"chip": {"certificate_report": center}}
        for i in range(120):
            canonical = f"ANSSI-CC-2020/{100 + i}"
            id_index[canonical] = f"card{i}"
            texts[f"card{i}"] = {
                "certificate_report": f"{canonical} builds upon the certified platform {center}"
            }
        start = time.monotonic()
        graph = build_graph(id_index, texts)
        impacted = impacted_by(graph, {center})
        elapsed = time.monotonic() - start
        assert len(impacted) == 120
        assert elapsed < 1.0, f"took {elapsed:.2f}s"
        ok(f"star fixture: all 120 referencers found in {elapsed:.3f}s")


class TestSpearmanCriteria:
    def test_spearman_exactness_and_oracles(self):
        x = [3.0, 1.0, 4.0, 1.5, 5.0]
        rho, _ = analytics.spearman(x, x)
        assert rho == 1.0
        rho_neg, _ = analytics.spearman(x, [-v for v in x])
        assert rho_neg == -1.0

        rng = random.Random(20240604)
        for _ in range(1_000):
            n = rng.randint(3, 10)
            xs = [rng.randint(0, 5) for _ in range(n)]
            ys = [rng.randint(0, 5) for _ in range(n)]
            try:
                got = analytics.spearman_rho(xs, ys)
            except Exception:
                assert len(set(xs)) == 1 or len(set(ys)) == 1
                continue
            assert got == oracles.rho_float(xs, ys)

        for n in (3, 4, 5, 6, 7, 8):
            xs = [rng.randint(0, 9) for _ in range(n)]
            ys = [rng.randint(0, 9) for _ in range(n)]
            if len(set(xs)) == 1 or len(set(ys)) == 1:
                xs[0] += 1
                ys[0] += 1
                xs[-1] -= 1
                ys[-1] -= 1
            _, p = analytics.spearman(xs, ys)
            expected = oracles.exact_p_less_int(xs, ys)
            assert Fraction(p).limit_denominator(math.factorial(n)) == expected, (n, xs, ys)

        base = [1, 5, 2, 9, 7, 3, 8, 4, 6]
        ranks = list(range(9))
        assert analytics.spearman([v**3 for v in base], ranks) == analytics.spearman(base, ranks)
        ok(
            "spearman: exact +/-1, 1,000 tie vectors equal the counting-rank oracle, "
            "exact permutation p matches enumeration for n<=8, transform-invariant"
        )


class TestAnalyticsEndToEnd:
    def test_golden_report_byte_identical(self, pipeline):
        golden = (CORPUS_DIR / "golden_report.json").read_bytes()
        produced = pipeline["report"].read_bytes()
        assert produced == golden
        report = json.loads(produced)
        timeline = report["timeline"]
        assert timeline["frac_before_cert"] + timeline["frac_after_cert"] == 1.0
        ok("analyze reproduces the committed golden report byte-for-byte; before+after = 1")

    def test_monotone_sar_dataset_negative_association(self):
        from test_analytics import monotone_sar_dataset

        dataset = monotone_sar_dataset(levels=4, per_level=50)
        assert len(dataset.records) == 200
        (row,) = analytics.correlate_all(dataset, min_support=50, min_level_count=20)
        assert row.rho_cve_count < 0
        assert row.p_cve_count < 0.01
        ok(
            f"constructed monotone SAR dataset (n=200): rho_cve_count={row.rho_cve_count:.3f} < 0, "
            f"p={row.p_cve_count:.2e} < 0.01"
        )


class TestSnapshotCriteria:
    def test_diff_identity_replay_and_search(self, pipeline):
        full = load_snapshot(str(pipeline["full"]))
        records_only = load_snapshot(str(pipeline["snapshot"]))
        empty = make_snapshot((), created="2024-06-01T00:00:00+00:00")
        for snap in (full, records_only, empty):
            assert diff(snap, snap) == []

        # replaying recorded events reconstructs the CVE and reference deltas
        matches = {k: dict(v) for k, v in full.matches.items()}
        victim = sorted(matches)[0]
        matches[victim] = dict(matches[victim])
        matches[victim]["cves"] = sorted(set(matches[victim]["cves"]) | {"CVE-2030-1111"})
        dropped = sorted(matches)[1]
        removed = matches.pop(dropped)
        successor = make_snapshot(
            full.records, ids=full.ids, graph=full.graph, matches=matches,
            report=full.report, created="2024-06-08T00:00:00+00:00",
        )
        events = diff(full, successor)
        assert replay_cve_sets(full.cve_sets(), events) == successor.cve_sets()
        assert replay_reference_sets(full.reference_sets(), events) == successor.reference_sets()
        assert removed["cves"], "fixture should have dropped a vulnerable record"

        # wildcard full-text search equals the linear-scan oracle on the corpus
        texts = load_artifact_texts(full.records)
        index = FulltextIndex(texts)
        for query in ("00.03.11.0*", "*Toolbox*", "AVA_VAN.?", "M7892", "no*such*string"):
            expected = sorted(
                key
                for key, by_kind in texts.items()
                if oracles.glob_matches_somewhere(
                    query, "\n".join(by_kind[k] for k in sorted(by_kind, key=lambda d: d.value))
                )
            )
            assert index.search(query) == expected, query
        ok(
            "snapshot/diff: diff(s,s)=[] on 3 fixtures, replay reconstructs CVE+reference "
            "deltas, wildcard search equals linear-scan oracle (no UI required)"
        )
