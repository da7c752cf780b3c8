import pytest

from certlab import rules
from certlab.errors import RulesParseError

SIMPLE_RULES = """\
evaluation_level:
    \\bEAL ?[1-7]\\+?
greetings: case_insensitive
    hello
"""


class TestLoadRules:
    def test_default_covers_taxonomy(self):
        ruleset = rules.default_rules()
        names = ruleset.group_names()
        assert "evaluation_level" in names
        assert "side_channel_attack" in names
        assert len(ruleset) == 33
        assert len(names) == len(set(names))

    def test_default_certificate_id_group_has_25_patterns(self):
        ruleset = rules.default_rules()
        assert len(ruleset["certificate_id"].patterns) == 25

    def test_empty_file(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("", encoding="utf-8")
        assert len(rules.load_rules(str(path))) == 0

    def test_unbalanced_parenthesis_raises(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("broken:\n    (unclosed\n", encoding="utf-8")
        with pytest.raises(RulesParseError) as exc:
            rules.load_rules(str(path))
        assert exc.value.group == "broken"
        assert exc.value.pattern_index == 0

    def test_duplicate_group_raises(self):
        with pytest.raises(RulesParseError):
            rules.parse_rules("a:\n    x\na:\n    y\n")

    def test_unknown_flag_raises(self):
        with pytest.raises(RulesParseError):
            rules.parse_rules("a: frobnicate\n    x\n")

    def test_pattern_without_header_raises(self):
        with pytest.raises(RulesParseError):
            rules.parse_rules("    orphan\n")

    def test_case_insensitive_flag(self):
        ruleset = rules.parse_rules(SIMPLE_RULES)
        assert ruleset["greetings"].case_insensitive
        assert not ruleset["evaluation_level"].case_insensitive


class TestExtract:
    def test_counts_repeated_matches(self):
        ruleset = rules.parse_rules(SIMPLE_RULES)
        hits = rules.extract("certified to EAL2 and EAL2 augmented", ruleset)
        assert hits == {"evaluation_level": {"EAL2": 2}}

    def test_empty_text(self):
        assert rules.extract("", rules.parse_rules(SIMPLE_RULES)) == {}

    def test_sar_hit(self):
        ruleset = rules.default_rules()
        hits = rules.extract("resistance shown by AVA_VLA.4 testing", ruleset)
        assert hits["security_assurance_requirement"] == {"AVA_VLA.4": 1}

    def test_case_insensitive_group_matches_any_case(self):
        ruleset = rules.parse_rules(SIMPLE_RULES)
        hits = rules.extract("Hello hello HELLO", ruleset)
        assert sum(hits["greetings"].values()) == 3

    def test_match_normalization_collapses_whitespace(self):
        ruleset = rules.parse_rules("spaced:\n    a\\s+b\n")
        hits = rules.extract("a    b and a\nb", ruleset)
        assert hits == {"spaced": {"a b": 2}}

    def test_deterministic(self):
        ruleset = rules.default_rules()
        text = "EAL4+ with AES and SHA-256, vendor NXP, DPA resistant, EAL4+"
        assert rules.extract(text, ruleset) == rules.extract(text, ruleset)

    def test_additive_across_line_partitions(self):
        ruleset = rules.parse_rules(SIMPLE_RULES)
        a = "EAL1 something\nEAL2 again"
        b = "hello EAL3"
        whole = rules.extract(a + "\n" + b, ruleset)
        part_a = rules.extract(a, ruleset)
        part_b = rules.extract(b, ruleset)
        for group, counts in whole.items():
            for key, count in counts.items():
                assert count == part_a.get(group, {}).get(key, 0) + part_b.get(group, {}).get(key, 0)

    def test_superset_counts_on_appended_text(self):
        ruleset = rules.parse_rules(SIMPLE_RULES)
        a = "EAL5 line one"
        b = "hello and EAL5"
        before = rules.extract(a, ruleset)
        after = rules.extract(a + "\n" + b, ruleset)
        for group, counts in before.items():
            for key, count in counts.items():
                assert after[group][key] >= count

    def test_table_categories_have_working_examples(self):
        # one representative match per category of the bundled taxonomy
        samples = {
            "certificate_id": "ANSSI-CC-2012/35",
            "evaluation_level": "EAL2",
            "protection_profile_id": "BSI-CC-PP-0072-2012",
            "security_assurance_requirement": "AVA_VLA.4",
            "security_functional_requirement": "FCS_COP.1",
            "evaluation_facility": "Riscure",
            "certification_process": "out-of-scope",
            "claim": "T.DOC_OPEN",
            "symmetric_crypto": "AES",
            "hash_function": "SHA-256",
            "post_quantum_crypto": "KYBER",
            "crypto_scheme": "PKE",
            "asymmetric_crypto": "RSA-2048",
            "crypto_protocol": "TLS",
            "randomness_source": "RNG",
            "cipher_mode": "CBC",
            "elliptic_curve": "P-256",
            "crypto_library": "OpenSSL",
            "tls_cipher_suite": "TLS_AES_256_GCM_SHA384",
            "crypto_engine": "SmartMX2",
            "vendor": "NXP",
            "device_model": "STM32F446ZCT",
            "trusted_execution_environment": "ARM TrustZone",
            "operating_system": "JCOP 4",
            "javacard_package": "java.security.provider",
            "ic_data_group": "EF.DG15",
            "javacard_constant": "ALG_AES_CBC_PKCS5",
            "cplc_data": "IC.Fabricator",
            "javacard_version": "JavaCard 2.2",
            "side_channel_attack": "DPA",
            "vulnerability": "CVE-2017-15361",
            "standard": "NIST SP 800-90A",
            "technical_report": "BSI TR-03110",
        }
        ruleset = rules.default_rules()
        assert set(samples) == set(ruleset.group_names())
        for group, sample in samples.items():
            hits = rules.extract(sample, ruleset)
            assert group in hits, f"{group} missed its own example {sample!r}"
