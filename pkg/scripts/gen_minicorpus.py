#!/usr/bin/env python3
"""Generate the deterministic mini corpus under tests/data/minicorpus/.

The corpus exercises the full pipeline: 60 certificates across all 17
schemes, artifact texts carrying IDs / references / assurance keywords, an
NVD fixture with CPEs and CVEs wired to a dozen vulnerable products, plus
known-answer labels (id_labels.json) for the ID-assignment precision check.

Rerunning the script reproduces byte-identical files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from certlab import vulnmap  # noqa: E402  (path bootstrap)
from certlab.ingest import CertRecord, record_key  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data" / "minicorpus"

FILLER_LINES = [
    "This document presents the outcome of an independent security evaluation.",
    "The target of evaluation comprises hardware and embedded firmware components.",
    "Evaluation activities were performed by an accredited testing laboratory.",
    "The developer provided design documentation and guidance for the evaluators.",
    "Penetration testing was conducted in accordance with the agreed methodology.",
    "Configuration management procedures were audited at the development site.",
    "Delivery procedures ensure the integrity of the product during shipment.",
    "The guidance documents describe secure acceptance and operation procedures.",
    "Cryptographic functions include AES, SHA-256 and RSA-2048 implementations.",
    "Random number generation relies on a hardware RNG with DRBG post-processing.",
    "The life-cycle documentation covers development and production environments.",
    "Site audits confirmed the physical protection of development assets.",
    "All identified residual risks were assessed as acceptable for the intended use.",
    "The evaluators confirmed resistance against attackers with the stated potential.",
    "Vulnerability analysis considered published attacks on comparable products.",
    "Side-channel countermeasures were reviewed, including DPA resistance testing.",
    "The security target defines the assumptions on the operational environment.",
    "Flaw remediation procedures describe how reported defects are processed.",
    "Independent testing reproduced a sample of the developer test cases.",
    "The certification body reviewed all evaluation reports for consistency.",
]


@dataclass
class Cert:
    slug: str
    scheme: str
    canonical: str | None
    title: str
    vendor: str
    category: str
    cert_date: date
    expiry: date | None
    status: str = "active"
    eal: str = ""
    sars: tuple[str, ...] = ()
    front_raw: str | None = None          # ID spelling on the frontpage (defaults to canonical)
    contents_raws: tuple[str, ...] = ()   # extra own-ID spellings deep in the report
    refs: tuple[str, ...] = ()            # other certificates' IDs mentioned in the report
    id_in_filename: bool = False
    meta_id: str | None = None            # PDF-metadata sidecar content
    report_name: str | None = None        # shared report files for duplicate entries
    mu: tuple[tuple[date, tuple[str, ...]], ...] = ()   # (date, referenced raw IDs)
    st_lines: tuple[str, ...] = ()
    cpes: tuple[str, ...] = ()            # cpe uris listed for this product
    cves: tuple[tuple[str, date, float, tuple[str, ...]], ...] = ()  # id, published, score, cwes
    no_report: bool = False

    @property
    def report_file(self) -> str:
        if self.report_name:
            return self.report_name
        if self.id_in_filename and self.canonical:
            safe = self.canonical.replace("/", "_").replace(" ", "_").replace(":", "")
            return f"{safe}_report.txt"
        return f"{self.slug}_report.txt"


D = date
SMARTCARD = "ICs, Smart Cards and Smart Card-Related Devices and Systems"


def cpe(vendor: str, product: str, version: str, part: str = "a") -> str:
    return f"cpe:2.3:{part}:{vendor}:{product}:{version}:*:*:*:*:*:*:*"


def vuln_cert(i, scheme, canonical, vendor_title, vendor, product, version, category,
              eal, ava, flr, during, scores, extra_sars=(), **kw):
    """One analytics certificate with its CPE and CVEs."""
    year_serial = 1000 + i * 20
    cves = []
    for j in range(during):
        cves.append(
            (f"CVE-2016-{year_serial + j}", D(2016, 3, 1) + timedelta(days=30 * j + i), scores[j], cwes_for(i, j))
        )
    # one pre-certification disclosure per product
    cves.append((f"CVE-2014-{year_serial}", D(2014, 6, 1) + timedelta(days=i), 6.0 + (i % 3), ("CWE-200",)))
    if i % 2 == 0:
        cves.append((f"CVE-2020-{year_serial}", D(2020, 5, 1) + timedelta(days=i), 5.0, ("CWE-79",)))
    return Cert(
        slug=f"v{i}",
        scheme=scheme,
        canonical=canonical,
        title=f"{vendor_title} {version}",
        vendor=vendor,
        category=category,
        cert_date=D(2015, 3, 1),
        expiry=D(2019, 3, 1),
        eal=eal,
        sars=(f"AVA_VAN.{ava}", f"ALC_FLR.{flr}") + tuple(extra_sars),
        cpes=(cpe(vendor.lower().replace(" ", "_"), product, version),),
        cves=tuple(cves),
        **kw,
    )


def cwes_for(i, j):
    pool = [
        ("CWE-119",),
        ("CWE-20",),
        ("CWE-119", "CWE-787"),
        ("CWE-200",),
        ("CWE-79",),
        ("CWE-119",),
        ("CWE-362",),
    ]
    return pool[(i + j) % len(pool)]


def build_certs() -> list[Cert]:
    certs: list[Cert] = []

    # --- twelve vulnerable products driving the analytics sections ---------
    # AVA_VAN.2 / ALC_FLR.1 / EAL2: three to four CVEs during validity
    certs.append(vuln_cert(1, "DE", "BSI-DSZ-CC-0801-2015", "Acme Networks Firewall", "Acme Networks",
                           "firewall", "5.1", "Boundary Protection Devices and Systems", "EAL2", 2, 1,
                           4, [9.8, 9.1, 8.8, 8.5], extra_sars=("ATE_COV.1",), id_in_filename=True,
                           mu=((D(2018, 3, 1), ()),)))
    certs.append(vuln_cert(2, "DE", "BSI-DSZ-CC-0802-2015", "Acme Networks Gateway", "Acme Networks",
                           "gateway", "5.2", "Boundary Protection Devices and Systems", "EAL2", 2, 1,
                           3, [9.0, 8.7, 8.2]))
    certs.append(vuln_cert(3, "FR", "ANSSI-CC-2015/21", "Redwood Mail Server", "Redwood Software",
                           "mail_server", "3.4", "Network and Network-Related Devices and Systems", "EAL2", 2, 1,
                           3, [8.9, 8.4, 8.1], extra_sars=("ATE_COV.1",)))
    certs.append(vuln_cert(4, "FR", "ANSSI-CC-2015/22", "Redwood Web Proxy", "Redwood Software",
                           "web_proxy", "3.5", "Network and Network-Related Devices and Systems", "EAL2", 2, 1,
                           3, [9.3, 8.6, 8.0]))
    # AVA_VAN.3 / ALC_FLR.2 / EAL4: two CVEs during validity
    certs.append(vuln_cert(5, "US", "CCEVS-VR-15-6601", "Bluefin Database Engine", "Bluefin Systems",
                           "database_engine", "7.2", "Databases", "EAL4", 3, 2,
                           2, [7.8, 7.1], extra_sars=("ATE_COV.2",),
                           mu=((D(2017, 1, 1), ()),)))
    certs.append(vuln_cert(6, "US", "CCEVS-VR-15-6602", "Bluefin Message Broker", "Bluefin Systems",
                           "message_broker", "7.3", "Databases", "EAL4", 3, 2,
                           2, [7.5, 6.9], extra_sars=("ATE_COV.2",)))
    certs.append(vuln_cert(7, "NL", "NSCIB-CC-15-55001-CR", "NXP Crypto Library", "NXP",
                           "crypto_library", "5.3", "Mobility", "EAL4", 3, 2,
                           2, [7.2, 6.8], extra_sars=("ATE_COV.1",), id_in_filename=True))
    certs.append(vuln_cert(8, "SE", "CSEC2015014", "Norrland VPN Client", "Norrland Security",
                           "vpn_client", "2.8", "Network and Network-Related Devices and Systems", "EAL4", 3, 2,
                           2, [7.7, 6.5], extra_sars=("ATE_COV.2",)))
    # AVA_VAN.4 / ALC_FLR.3 / EAL4+|EAL5: one CVE during validity
    certs.append(vuln_cert(9, "DE", "BSI-DSZ-CC-0901-2015", "Acme Networks HSM", "Acme Networks",
                           "hsm_firmware", "4.0", "Key Management Systems", "EAL4+", 4, 3,
                           1, [5.2], mu=((D(2015, 6, 1), ()),)))
    certs.append(vuln_cert(10, "DE", "BSI-DSZ-CC-0902-2015", "Acme Networks Signing Service", "Acme Networks",
                           "signing_service", "4.1", "Key Management Systems", "EAL4+", 4, 3,
                           1, [4.8], extra_sars=("ATE_COV.1",)))
    certs.append(vuln_cert(11, "UK", "CRP301", "Albion Disk Encryptor", "Albion Security",
                           "disk_encryptor", "6.0", "Data Protection", "EAL5", 4, 3,
                           1, [4.4]))
    certs.append(vuln_cert(12, "UK", "CRP302", "Albion Token Manager", "Albion Security",
                           "token_manager", "6.1", "Data Protection", "EAL5", 4, 3,
                           1, [4.0], extra_sars=("ATE_COV.2",)))

    # --- smartcard cluster (excluded from analytics, drives graph + UI) ----
    certs.append(Cert(
        slug="chip0", scheme="DE", canonical="BSI-DSZ-CC-0633-2010",
        title="Infineon Security Controller M7892 v1.02.013",
        vendor="Infineon", category=SMARTCARD,
        cert_date=D(2010, 5, 1), expiry=D(2019, 9, 1), status="archived", eal="EAL5+",
        sars=("AVA_VAN.5", "ALC_FLR.1"),
        id_in_filename=True,
        cpes=(cpe("infineon", "m7892_security_controller", "1.02", part="h"),),
        cves=(("CVE-2017-15361", D(2017, 10, 16), 5.9, ("CWE-320",)),),
    ))
    certs.append(Cert(
        slug="toolbox", scheme="FR", canonical="ANSSI-CC-2009/11",
        title="Atmel Cryptographic Toolbox 00.03.11.05",
        vendor="Atmel", category=SMARTCARD,
        cert_date=D(2009, 7, 1), expiry=D(2018, 7, 1), status="archived", eal="EAL4+",
        sars=("AVA_VAN.4",),
        front_raw="DCSSI-2009/11",
        contents_raws=("Rapport de certification 2009/11",),
        cpes=(cpe("atmel", "cryptographic_toolbox", "00.03", part="a"),),
        cves=(("CVE-2019-15809", D(2019, 10, 3), 6.1, ("CWE-203",)),),
    ))
    certs.append(Cert(
        slug="idprotect", scheme="FR", canonical="ANSSI-CC-2012/23",
        title="Athena IDProtect v2.1 on Atmel Toolbox 00.03.11.05",
        vendor="Athena Smartcard", category=SMARTCARD,
        cert_date=D(2012, 4, 1), expiry=D(2017, 4, 1), status="archived", eal="EAL4+",
        sars=("AVA_VAN.4", "ALC_FLR.2"),
        refs=("DCSSI-2009/11",),
    ))
    for i in range(1, 7):
        certs.append(Cert(
            slug=f"de_card{i}", scheme="DE", canonical=f"BSI-DSZ-CC-{700 + i:04d}-2013",
            title=f"SmartID Card Applet {i}.0 on M7892",
            vendor="SmartID", category=SMARTCARD,
            cert_date=D(2013, 3, 1), expiry=D(2018, 3, 1), status="archived", eal="EAL4+",
            sars=("AVA_VAN.5", "ALC_FLR.1"),
            refs=("BSI-DSZ-CC-0633-2010",),
        ))
    certs.append(Cert(
        slug="de_os", scheme="DE", canonical="BSI-DSZ-CC-0950-2014",
        title="SmartID eID OS 3.1",
        vendor="SmartID", category=SMARTCARD,
        cert_date=D(2014, 6, 1), expiry=D(2019, 6, 1), eal="EAL5",
        sars=("AVA_VAN.5", "ALC_FLR.2"),
        refs=("BSI-DSZ-CC-0701-2013",),
    ))
    certs.append(Cert(
        slug="fr_card2", scheme="FR", canonical="ANSSI-CC-2014/33",
        title="Athena IDProtect Duo v2.2",
        vendor="Athena Smartcard", category=SMARTCARD,
        cert_date=D(2014, 9, 1), expiry=D(2019, 9, 1), eal="EAL4+",
        sars=("AVA_VAN.4", "ALC_FLR.1"),
        refs=("ANSSI-CC-2012/23",),
        st_lines=("The platform embeds Atmel Toolbox 00.03.11.08 fast library functions.",),
    ))

    # --- short-validity screen ------------------------------------------------
    certs.append(Cert(
        slug="sv1", scheme="DE", canonical="BSI-DSZ-CC-0960-2016",
        title="Acme Networks Legacy Filter 1.0",
        vendor="Acme Networks", category="Boundary Protection Devices and Systems",
        cert_date=D(2016, 3, 1), expiry=D(2016, 3, 1) + timedelta(days=200), status="archived", eal="EAL2",
    ))
    certs.append(Cert(
        slug="sv2", scheme="FR", canonical="ANSSI-CC-2015/40",
        title="Redwood Backup Agent 1.9",
        vendor="Redwood Software", category="Data Protection",
        cert_date=D(2015, 3, 1), expiry=D(2015, 3, 1) + timedelta(days=364), status="archived",
        cpes=(cpe("redwood_software", "backup_agent", "1.9"),),
        cves=(("CVE-2015-7777", D(2015, 12, 1), 7.0, ("CWE-22",)),),
    ))
    certs.append(Cert(
        slug="sv3", scheme="FR", canonical="ANSSI-CC-2015/41",
        title="Redwood Backup Console 2.0",
        vendor="Redwood Software", category="Data Protection",
        cert_date=D(2015, 3, 1), expiry=D(2015, 3, 1) + timedelta(days=365), status="archived",
    ))

    # --- ID-assignment exercises ----------------------------------------------
    certs.append(Cert(
        slug="jp_partial", scheme="JP", canonical="JISEC-CC-CRP-C0599-01-2018",
        title="Hikari MFP Controller 1.4",
        vendor="Hikari Imaging", category="Multi-Function Devices",
        cert_date=D(2018, 2, 1), expiry=D(2023, 2, 1), eal="EAL3",
        sars=("AVA_VAN.2", "ALC_FLR.1"),
        contents_raws=("Certification No. C0599",),
    ))
    certs.append(Cert(
        slug="us_meta", scheme="US", canonical="CCEVS-VR-10-0001",
        title="Liberty OS Kernel 10.2",
        vendor="Liberty Computing", category="Operating Systems",
        cert_date=D(2010, 8, 1), expiry=D(2015, 8, 1), status="archived", eal="EAL4",
        sars=("AVA_VAN.3",),
        front_raw=None,  # no frontpage ID: metadata + contents carry it
        meta_id="Title: Validation Report CCEVS-VR-10-0001",
        contents_raws=("CCEVS-VR-10-0001",),
    ))
    certs.append(Cert(
        slug="de_tricky", scheme="DE", canonical="BSI-DSZ-CC-0977-2016",
        title="Acme Networks Router OS 9.0",
        vendor="Acme Networks", category="Network and Network-Related Devices and Systems",
        cert_date=D(2016, 10, 1), expiry=D(2021, 10, 1), eal="EAL4",
        sars=("AVA_VAN.4", "ALC_FLR.2"),
        id_in_filename=True,
        refs=("BSI-DSZ-CC-0801-2015", "BSI-DSZ-CC-0801-2015", "BSI-DSZ-CC-0801-2015",
              "BSI-DSZ-CC-0802-2015", "BSI-DSZ-CC-0802-2015"),
    ))
    certs.append(Cert(
        slug="noid", scheme="DE", canonical=None,
        title="Acme Networks Prototype Appliance 0.9",
        vendor="Acme Networks", category="Other Devices and Systems",
        cert_date=D(2017, 1, 1), expiry=None, eal="EAL1",
    ))
    # duplicate portal entries sharing one report file
    for suffix in ("a", "b"):
        certs.append(Cert(
            slug=f"dup_{suffix}", scheme="NO", canonical="SERTIT-101",
            title=f"Fjord Gateway Module {suffix.upper()} 2.0",
            vendor="Fjord Defence", category="Network and Network-Related Devices and Systems",
            cert_date=D(2015, 5, 1), expiry=D(2020, 5, 1), eal="EAL4",
            report_name="sertit_101_report.txt",
        ))

    # --- breadth across the remaining schemes ----------------------------------
    breadth = [
        ("au1", "AU", "Certificate Number: 2014/87", "Southern Cross TOE 1.1", "Southern Cross"),
        ("au2", "AU", "Certificate Number: 2016/92", "Southern Cross TOE 2.0", "Southern Cross"),
        ("ca1", "CA", "522 EWA 2015", "Maple VPN Concentrator 3.3", "Maple Secure"),
        ("ca2", "CA", "383-4-339", "Maple Archive Vault 1.2", "Maple Secure"),
        ("es1", "ES", "2015-9-INF-1301-v1", "Iberia Signature Device 2.4", "Iberia Digital"),
        ("es2", "ES", "2016-11-INF-1544-v2", "Iberia HSM 3.0", "Iberia Digital"),
        ("in1", "IN", "IC3S/KOL01/ADVA/EAL2/0520/0022", "Ganges Switch 08.1", "Ganges Networks"),
        ("in2", "IN", "IC3S/DEL02/STQC/EAL3/0716/0031", "Ganges Router 09.2", "Ganges Networks"),
        ("it1", "IT", "OCSI/CERT/TEC/02/2015/RC", "Adriatic Fiscal Printer 5.5", "Adriatic Meccanica"),
        ("it2", "IT", "OCSI/CERT/ATS/09/2017/RC", "Adriatic POS Terminal 6.0", "Adriatic Meccanica"),
        ("jp1", "JP", "JISEC-CC-CRP-C0451-01-2015", "Hikari Copier Firmware 2.2", "Hikari Imaging"),
        ("kr1", "KR", "KECS-NISS-0612-2015", "Hangang IPS 4.4", "Hangang Labs"),
        ("kr2", "KR", "KECS-ISIS-0713-2016", "Hangang WAF 5.0", "Hangang Labs"),
        ("my1", "MY", "ISCB-5-RPT-C104-CR-V1a", "Straits Payment Module 1.6", "Straits Tech"),
        ("my2", "MY", "ISCB-3-RPT-C211-CR-V1", "Straits Kiosk OS 2.1", "Straits Tech"),
        ("nl1", "NL", "NSCIB-CC-16-58321-CR2", "Tulip eGate Reader 4.2", "Tulip Identification"),
        ("no1", "NO", "SERTIT-088", "Fjord Link Encryptor 7.1", "Fjord Defence"),
        ("se1", "SE", "CSEC2016012", "Norrland Log Server 1.3", "Norrland Security"),
        ("sg1", "SG", "CSA_CC_21005", "Merlion Auth Server 3.9", "Merlion Systems"),
        ("sg2", "SG", "CSA_CC_19002", "Merlion PKI Gateway 2.5", "Merlion Systems"),
        ("tr1", "TR", "21.0.03/TSE-CCCS-41", "Anatolia Meter 1.8", "Anatolia Enerji"),
        ("tr2", "TR", "38.0.01/TSE-CCCS-77", "Anatolia Relay 2.2", "Anatolia Enerji"),
        ("uk1", "UK", "CRP225", "Albion Mail Guard 3.2", "Albion Security"),
        ("us1", "US", "CCEVS-VR-VID-10489-2012", "Liberty Directory 8.1", "Liberty Computing"),
        ("nl2", "NL", "NSCIB-CC-14-51234-CR", "Tulip Border Gate 1.5", "Tulip Identification"),
        ("se2", "SE", "CSEC2014007", "Norrland Diode 2.0", "Norrland Security"),
        ("de_extra1", "DE", "BSI-DSZ-CC-0988-2017", "Acme Networks Load Balancer 2.2", "Acme Networks"),
        ("fr_extra1", "FR", "ANSSI-CC-2017/64", "Redwood DNS Shield 1.1", "Redwood Software"),
        ("fr_extra2", "FR", "ANSSI-CC-2018/12", "Redwood NTP Guard 1.0", "Redwood Software"),
    ]
    for i, (slug, scheme, canonical, title, vendor) in enumerate(breadth):
        sars = ("AVA_VAN.5", "ALC_FLR.3") if i % 2 == 0 else ("AVA_VAN.4", "ALC_FLR.3")
        certs.append(Cert(
            slug=slug, scheme=scheme, canonical=canonical,
            title=title, vendor=vendor,
            category="Network and Network-Related Devices and Systems",
            cert_date=D(2015, 4, 1) + timedelta(days=17 * i),
            expiry=D(2020, 4, 1) + timedelta(days=17 * i),
            eal="EAL4" if i % 3 else "EAL5",
            sars=sars,
        ))

    # maintenance-update reference: nl1 mentions se1 only in its update
    for cert in certs:
        if cert.slug == "nl1":
            cert.mu = ((D(2018, 5, 1), ("CSEC2016012",)),)
        if cert.slug == "v1":
            cert.mu = ((D(2018, 3, 1), ("BSI-DSZ-CC-0802-2015",)),)
    return certs


def report_text(cert: Cert) -> str:
    lines = []
    front = cert.front_raw if cert.front_raw is not None else cert.canonical
    if front:
        lines.append(front)
    lines.append(f"Certification Report for {cert.title}")
    lines.append(f"Sponsor: {cert.vendor}")
    lines.append(f"Product category: {cert.category}")
    if cert.eal:
        lines.append(f"The product was evaluated against assurance level {cert.eal}.")
    while len(lines) < 44:
        lines.append(FILLER_LINES[len(lines) % len(FILLER_LINES)])
    # beyond the frontpage window from here on
    for raw in cert.contents_raws:
        lines.append(f"This report is registered under {raw}.")
    if cert.sars:
        lines.append("The assurance package includes " + ", ".join(cert.sars) + ".")
    for ref in cert.refs:
        lines.append(f"The evaluation builds upon the certified platform {ref}.")
    lines.append("End of report.")
    return "\n".join(lines) + "\n"


def st_text(cert: Cert) -> str:
    lines = [
        f"Security Target for {cert.title}",
        f"Developer: {cert.vendor}",
        "The TOE provides protection of user data and secure management functions.",
    ]
    if cert.eal:
        lines.append(f"The claimed assurance level is {cert.eal}.")
    if cert.sars:
        lines.append("Assurance components: " + ", ".join(cert.sars) + ".")
    lines.extend(cert.st_lines)
    lines.append("Cryptographic support includes AES, SHA-256 and TLS channels.")
    return "\n".join(lines) + "\n"


def mu_text(cert: Cert, idx: int, refs: tuple[str, ...]) -> str:
    lines = [
        f"Maintenance report {idx} for {cert.title}",
        "The change is classified as minor and does not alter the certified configuration.",
    ]
    for ref in refs:
        lines.append(f"The maintained product continues to rely on {ref}.")
    lines.append("The impact analysis concluded that assurance is maintained.")
    return "\n".join(lines) + "\n"


def main() -> None:
    certs = build_certs()
    slugs = [c.slug for c in certs]
    assert len(slugs) == len(set(slugs)), "duplicate slugs"
    print(f"{len(certs)} certificates")

    artifacts = OUT / "artifacts"
    nvd = OUT / "nvd"
    artifacts.mkdir(parents=True, exist_ok=True)
    nvd.mkdir(parents=True, exist_ok=True)

    csv_rows = ["scheme,category,title,vendor,cert_date,expiry_date,status,eal,report_path,target_path"]
    html_blocks = []
    labels = {}
    written: set[str] = set()

    for cert in certs:
        report = "" if cert.no_report else cert.report_file
        target = "" if cert.no_report else f"{cert.slug}_st.txt"
        row = ",".join([
            cert.scheme,
            f'"{cert.category}"',
            f'"{cert.title}"',
            f'"{cert.vendor}"',
            cert.cert_date.isoformat(),
            cert.expiry.isoformat() if cert.expiry else "",
            cert.status,
            cert.eal,
            report,
            target,
        ])
        csv_rows.append(row)
        if cert.slug == "v1":
            csv_rows.append(row)  # the portal's famous duplicated row

        block = [
            "[cert]",
            f"scheme: {cert.scheme}",
            f"category: {cert.category}",
            f"title: {cert.title}",
            # one deliberate vendor-case conflict, warned and resolved to CSV
            f"vendor: {cert.vendor.upper() if cert.slug == 'v3' else cert.vendor}",
            f"cert_date: {(cert.cert_date + timedelta(days=1)) if cert.slug == 'v4' else cert.cert_date}",
            f"expiry_date: {cert.expiry.isoformat() if cert.expiry else ''}",
            f"status: {cert.status}",
            f"eal: {cert.eal}",
            f"report_path: {report}",
            f"target_path: {target}",
        ]
        for idx, (mu_date, _) in enumerate(cert.mu, start=1):
            block.append(f"maintenance: {mu_date.isoformat()} {cert.slug}_mu{idx}.txt")
        html_blocks.append("\n".join(block))

        if not cert.no_report:
            if cert.report_file not in written:
                (artifacts / cert.report_file).write_text(report_text(cert), encoding="utf-8")
                written.add(cert.report_file)
            (artifacts / f"{cert.slug}_st.txt").write_text(st_text(cert), encoding="utf-8")
            if cert.meta_id:
                (artifacts / f"{cert.report_file}.meta").write_text(cert.meta_id + "\n", encoding="utf-8")
            for idx, (mu_date, refs) in enumerate(cert.mu, start=1):
                (artifacts / f"{cert.slug}_mu{idx}.txt").write_text(mu_text(cert, idx, refs), encoding="utf-8")
        key = record_key(cert.scheme, cert.title, "" if cert.no_report else cert.report_file)
        labels[key] = {"slug": cert.slug, "canonical": cert.canonical}

    (OUT / "snapshot.csv").write_text("\n".join(csv_rows) + "\n", encoding="utf-8")
    (OUT / "snapshot_html.txt").write_text("\n\n".join(html_blocks) + "\n", encoding="utf-8")

    # --- NVD fixtures ---------------------------------------------------------
    cpe_lines = []
    cve_lines = []
    for cert in certs:
        for uri in cert.cpes:
            cpe_lines.append(uri)
        for cve_id, published, score, cwes in cert.cves:
            target_cpes = ",".join(cert.cpes)
            cve_lines.append(f"{cve_id}|{published.isoformat()}|{score}|{','.join(cwes)}|{target_cpes}")
    # decoys exercising the candidate filters in the real pipeline
    cpe_lines += [
        cpe("acme_networks", "fw", "5.1"),                # product too short
        cpe("acme_corporation", "firewall", "5.1"),       # vendor mismatch, no alias
        cpe("acme_networks", "firewall", "6.0"),          # version mismatch
        cpe("unrelated_vendor", "telescope_control", "1.0"),
    ]
    cve_lines += [
        f"CVE-2021-4242|2021-04-02|9.1|CWE-502|{cpe('unrelated_vendor', 'telescope_control', '1.0')}",
        "CVE-2022-5050|2022-07-09|3.1|CWE-1188|",
    ]
    (nvd / "cpe_dict.txt").write_text("\n".join(cpe_lines) + "\n", encoding="utf-8")
    (nvd / "cve_feed.txt").write_text("\n".join(cve_lines) + "\n", encoding="utf-8")
    (OUT / "id_labels.json").write_text(
        json.dumps(labels, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # --- self-checks ------------------------------------------------------------
    loaded = vulnmap.load_nvd(str(nvd / "cpe_dict.txt"), str(nvd / "cve_feed.txt"))
    aliases = vulnmap.load_vendor_aliases()
    matched = 0
    for cert in certs:
        record = CertRecord(
            record_key=cert.slug, scheme=cert.scheme, category=cert.category,
            title=cert.title, vendor=cert.vendor, cert_date=cert.cert_date,
            expiry_date=cert.expiry, status=cert.status, declared_eal=cert.eal or None,
        )
        versions = vulnmap.extract_versions(cert.title)
        candidates = vulnmap.candidate_cpes(record, versions, loaded, aliases=aliases)
        result = vulnmap.match_certificate(record, candidates, loaded)
        expected_cpes = set(cert.cpes)
        got = {uri for uri, _ in result.matched_cpes}
        assert got == expected_cpes, f"{cert.slug}: designed CPEs {expected_cpes}, matcher found {got}"
        if got:
            matched += 1
            expected_cves = {cid for cid, *_ in cert.cves}
            assert result.cves == expected_cves, f"{cert.slug}: CVEs {result.cves} != {expected_cves}"
    print(f"self-check OK: {matched} certificates match their designed CPEs")


if __name__ == "__main__":
    main()
