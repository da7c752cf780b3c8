from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from certlab import certid
from certlab.certid import IdCandidate, Source
from certlab.errors import NotAnId

TABLE_EXAMPLES = {
    "AU": "Certificate Number: 2008/49",
    "CA": "522 EWA 2020",
    "DE": "BSI-DSZ-CC-1052-V3-2021",
    "ES": "2018-6-INF-2529-v2",
    "FR": "ANSSI-CC-2018/57v2",
    "IN": "IC3S/KOL01/ADVA/EAL2/0520/0022",
    "IT": "OCSI/CERT/TEC/02/2009/RC",
    "JP": "JISEC-CC-CRP-C0599-01-2018",
    "KR": "KECS-NISS-0612-2015",
    "MY": "ISCB-5-RPT-C104-CR-V1a",
    "NL": "NSCIB-CC-17-67206-CR2",
    "NO": "SERTIT-040",
    "SE": "CSEC2016012",
    "SG": "CSA_CC_21005",
    "TR": "21.0.03/TSE-CCCS-41",
    "UK": "CRP225",
    "US": "CCEVS-VR-03-0044",
}


class TestCanonicalize:
    @pytest.mark.parametrize("scheme,raw", sorted(TABLE_EXAMPLES.items()))
    def test_reference_ids_roundtrip(self, scheme, raw):
        cid = certid.canonicalize(raw, scheme)
        assert cid.canonical == raw
        assert "counter" in cid.components
        again = certid.canonicalize(cid.canonical, scheme)
        assert again == cid

    def test_de_components(self):
        cid = certid.canonicalize("BSI-DSZ-CC-1052-V3-2021", "DE")
        assert cid.components == {"counter": 1052, "version": "V3", "year": 2021}

    def test_se_space_variant_joins(self):
        cid = certid.canonicalize("CSEC 2016012", "SE")
        assert cid.canonical == "CSEC2016012"
        assert cid.components["year"] == 2016
        assert cid.components["counter"] == 12

    def test_au_certificate_number(self):
        cid = certid.canonicalize("Certificate Number: 2008/49", "AU")
        assert cid.components == {"year": 2008, "counter": 49}

    def test_fr_report_phrase_maps_to_authority_prefix(self):
        cid = certid.canonicalize("Rapport de certification 2018/57v2", "FR")
        assert cid.canonical == "ANSSI-CC-2018/57v2"

    def test_fr_old_authority_prefix_joins(self):
        assert certid.canonicalize("DCSSI-2009/11", "FR").canonical == "ANSSI-CC-2009/11"

    def test_de_zero_padding_joins(self):
        assert certid.canonicalize("BSI-DSZ-CC-633-2010", "DE").canonical == "BSI-DSZ-CC-0633-2010"

    def test_de_maintenance_doc_suffix_joins_to_base(self):
        cid = certid.canonicalize("BSI-DSZ-CC-1052-V3-2021-MA-01", "DE")
        assert cid.canonical == "BSI-DSZ-CC-1052-V3-2021"
        assert cid.components["doc"] == "MA-01"

    def test_not_an_id(self):
        with pytest.raises(NotAnId):
            certid.canonicalize("no identifier here", "DE")

    def test_unknown_scheme_yields_nothing(self):
        with pytest.raises(NotAnId):
            certid.canonicalize("BSI-DSZ-CC-1052-2021", "??")

    @pytest.mark.parametrize("scheme,raw", sorted(TABLE_EXAMPLES.items()))
    def test_idempotent(self, scheme, raw):
        cid = certid.canonicalize(raw, scheme)
        assert certid.canonicalize(cid.canonical, scheme).canonical == cid.canonical


class TestFindCandidates:
    def test_report_phrase_yields_fr_candidate(self):
        text = "Rapport de certification 2018/57v2 concerning the product"
        candidates = certid.find_candidates({Source.CONTENTS: text}, "FR")
        assert [c.canonical for c in candidates] == ["ANSSI-CC-2018/57v2"]
        assert candidates[0].weight == 1

    def test_empty_sources(self):
        assert certid.find_candidates({s: "" for s in Source}, "FR") == []

    def test_foreign_scheme_id_filtered(self):
        text = "This FR product builds on BSI-DSZ-CC-0633-2010 from Germany, see ANSSI-CC-2013/55."
        candidates = certid.find_candidates({Source.CONTENTS: text}, "FR")
        assert {c.canonical for c in candidates} == {"ANSSI-CC-2013/55"}

    def test_weights_normalized_within_source(self):
        text = "ANSSI-CC-2013/55 ANSSI-CC-2013/55 ANSSI-CC-2013/55 ANSSI-CC-2010/13"
        candidates = {c.canonical: c for c in certid.find_candidates({Source.CONTENTS: text}, "FR")}
        assert candidates["ANSSI-CC-2013/55"].weight == Fraction(3, 4)
        assert candidates["ANSSI-CC-2010/13"].weight == Fraction(1, 4)

    def test_jp_specific_pattern_masks_generic_one(self):
        text = "JISEC-CC-CRP-C0599-01-2018 issued"
        candidates = certid.find_candidates({Source.CONTENTS: text}, "JP")
        assert [c.canonical for c in candidates] == ["JISEC-CC-CRP-C0599-01-2018"]

    def test_variant_spellings_merge_to_one_candidate(self):
        text = "CSEC 2016012 also written CSEC2016012"
        candidates = certid.find_candidates({Source.CONTENTS: text}, "SE")
        assert len(candidates) == 1
        assert candidates[0].weight == 1


def cand(canonical, source, weight, scheme="DE", raw=None):
    return IdCandidate(
        raw=raw or canonical,
        canonical=canonical,
        scheme=scheme,
        source=source,
        weight=Fraction(weight),
    )


class TestAssignId:
    def test_single_candidate(self):
        only = cand("BSI-DSZ-CC-1111-2020", Source.CONTENTS, 1)
        assert certid.assign_id([only]).canonical == "BSI-DSZ-CC-1111-2020"

    def test_empty_returns_none(self):
        assert certid.assign_id([]) is None

    def test_weighted_merge_hand_computed(self):
        # frontpage 1.0 * 1.5 = 1.5 loses to contents 1.0 + filename 1.0 = 2.0
        a = cand("BSI-DSZ-CC-1111-2020", Source.FRONTPAGE, 1)
        b1 = cand("BSI-DSZ-CC-2222-2020", Source.CONTENTS, 1)
        b2 = cand("BSI-DSZ-CC-2222-2020", Source.FILENAME, 1)
        assert certid.assign_id([a, b1, b2]).canonical == "BSI-DSZ-CC-2222-2020"

    def test_pdf_metadata_weighting(self):
        # 1.0 * 1.2 beats 1.0 * 1.0
        a = cand("BSI-DSZ-CC-1111-2020", Source.PDF_METADATA, 1)
        b = cand("BSI-DSZ-CC-2222-2020", Source.FILENAME, 1)
        assert certid.assign_id([a, b]).canonical == "BSI-DSZ-CC-1111-2020"

    def test_tie_breaks_to_longest(self):
        short = cand("BSI-DSZ-CC-1052-2021", Source.CONTENTS, Fraction(1, 2))
        long = cand("BSI-DSZ-CC-1052-V3-2021", Source.CONTENTS, Fraction(1, 2))
        assert certid.assign_id([short, long]).canonical == "BSI-DSZ-CC-1052-V3-2021"

    def test_equal_length_tie_breaks_lexicographically(self):
        a = cand("BSI-DSZ-CC-2222-2020", Source.CONTENTS, Fraction(1, 2))
        b = cand("BSI-DSZ-CC-1111-2020", Source.CONTENTS, Fraction(1, 2))
        assert certid.assign_id([a, b]).canonical == "BSI-DSZ-CC-1111-2020"

    @given(st.permutations(list(range(4))))
    def test_permutation_invariant(self, order):
        pool = [
            cand("BSI-DSZ-CC-1111-2020", Source.FRONTPAGE, 1),
            cand("BSI-DSZ-CC-2222-2020", Source.CONTENTS, Fraction(2, 3)),
            cand("BSI-DSZ-CC-2222-2020", Source.FILENAME, 1),
            cand("BSI-DSZ-CC-3333-2020", Source.CONTENTS, Fraction(1, 3)),
        ]
        baseline = certid.assign_id(pool).canonical
        shuffled = [pool[i] for i in order]
        assert certid.assign_id(shuffled).canonical == baseline

    @given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(100)))
    def test_global_weight_scaling_invariant(self, factor):
        pool = [
            cand("BSI-DSZ-CC-1111-2020", Source.FRONTPAGE, 1),
            cand("BSI-DSZ-CC-2222-2020", Source.CONTENTS, Fraction(2, 3)),
            cand("BSI-DSZ-CC-2222-2020", Source.FILENAME, 1),
        ]
        baseline = certid.assign_id(pool).canonical
        scaled = [
            IdCandidate(c.raw, c.canonical, c.scheme, c.source, c.weight * factor) for c in pool
        ]
        assert certid.assign_id(scaled).canonical == baseline


class TestHelpers:
    def test_candidates_from_counts_normalizes(self):
        counts = {"BSI-DSZ-CC-0633-2010": 3, "BSI-DSZ-CC-633-2010": 1, "junk": 5}
        candidates = certid.candidates_from_counts(counts, Source.CONTENTS, "DE")
        assert len(candidates) == 1  # variants merge, junk dropped
        assert candidates[0].canonical == "BSI-DSZ-CC-0633-2010"
        assert candidates[0].weight == 1

    def test_detect_collisions(self):
        cid = certid.canonicalize("SERTIT-040", "NO")
        other = certid.canonicalize("SERTIT-115", "NO")
        collisions = certid.detect_collisions({"k1": cid, "k2": cid, "k3": other, "k4": None})
        assert collisions == {"SERTIT-040": ["k1", "k2"]}

    def test_find_all_ids_spans_schemes(self):
        text = "Based on BSI-DSZ-CC-0633-2010 and ANSSI-CC-2013/55."
        found = certid.find_all_ids(text)
        assert found["BSI-DSZ-CC-0633-2010"] == 1
        assert found["ANSSI-CC-2013/55"] == 1
