"""Desk-scale synthetic corpus generation for Zeek logs, sensors, devices.

Substitute for the real captures: deterministic given the seed, label mix
within one record of the requested fractions, and every record satisfies
the same invariants the parsers enforce (generator/parser duality).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .records import (
    SENSOR_TYPES,
    AttackLabel,
    ConnRecord,
    IngestError,
    SensorReading,
    ZeekRecord,
)

ZEEK_ORDER = ("conn", "dns", "http", "files", "ntp", "weird")
ALL_KINDS = ZEEK_ORDER + SENSOR_TYPES + ("devices",)


class InvalidSpec(IngestError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """What to synthesize: record counts per kind, attack mix, time window."""

    counts: dict = field(default_factory=dict)
    label_mix: dict = field(default_factory=lambda: {AttackLabel.Benign: 1.0})
    window: tuple = (datetime(2021, 3, 1), datetime(2021, 3, 8))
    address_pool_size: int = 24
    seed: int = 0

    def validate(self) -> None:
        for kind, n in self.counts.items():
            if kind not in ALL_KINDS:
                raise InvalidSpec(f"unknown kind {kind!r}")
            if n < 0:
                raise InvalidSpec(f"count for {kind!r} must be nonnegative")
        total = sum(self.label_mix.values())
        if abs(total - 1.0) > 1e-9:
            raise InvalidSpec(f"label fractions must sum to 1, got {total}")
        for frac in self.label_mix.values():
            if frac < 0:
                raise InvalidSpec("label fractions must be nonnegative")
        lo, hi = self.window
        if not lo < hi:
            raise InvalidSpec("time window must be nonempty")
        if self.address_pool_size < 2:
            raise InvalidSpec("address pool needs at least 2 addresses")


def apportion(n: int, fractions: dict) -> dict:
    """Largest-remainder split of n items; each count within 1 of n*fraction."""
    keys = sorted(fractions, key=lambda k: str(k))
    floors = {k: int(n * fractions[k]) for k in keys}
    remainder = n - sum(floors.values())
    by_frac = sorted(keys, key=lambda k: (n * fractions[k]) - floors[k], reverse=True)
    for k in by_frac[:remainder]:
        floors[k] += 1
    return floors


_SERVICES = ["http", "dns", "ssl", "ntp", None, None]
_STATES_BENIGN = ["SF", "SF", "SF", "S1", "RSTO"]
_HISTORY_BENIGN = ["ShADadFf", "ShADadfF", "ShAdDaFf", "Dd"]
_WEIRD_NAMES = ["bad_TCP_checksum", "data_before_established", "active_connection_reuse",
                "possible_split_routing", "inappropriate_FIN"]
_QUERIES = ["ntp.pool.org", "updates.vendor.example", "cdn.media.example",
            "time.cloud.example", "telemetry.iot.example", "firmware.hub.example"]
_METHODS = ["GET", "GET", "GET", "POST", "HEAD"]
_URIS = ["/", "/status", "/api/v1/data", "/firmware.bin", "/index.html", "/metrics"]
_DEVICE_TYPES = ["camera", "thermostat", "lock", "speaker", "hub", "plug"]
_VENDORS = ["Acme", "Lumen", "Nest", "Orbit", "Vega"]


class _Synth:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        half = max(1, spec.address_pool_size // 2)
        self.local_ips = [f"192.168.{1 + i // 250}.{2 + i % 250}" for i in range(half)]
        self.remote_ips = [
            f"203.0.113.{2 + i % 250}" if i % 2 == 0 else f"198.51.100.{2 + i % 250}"
            for i in range(spec.address_pool_size - half)
        ] or ["203.0.113.2"]
        self.rooms = [f"R{1 + i // 13}{i % 13:02d}" for i in range(51)]
        self._uid_counter = 0
        self.conn_uids: list[str] = []

    def _uid(self, prefix: str = "C") -> str:
        self._uid_counter += 1
        alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        tail = "".join(self.rng.choice(alphabet) for _ in range(9))
        return f"{prefix}{self._uid_counter:06d}{tail}"

    def _ts(self) -> datetime:
        lo, hi = self.spec.window
        span = int((hi - lo).total_seconds())
        return lo + timedelta(seconds=self.rng.randrange(span), microseconds=self.rng.randrange(0, 1_000_000, 1000))

    def conn(self, n: int) -> list[ConnRecord]:
        labels: list[AttackLabel] = []
        for label, count in apportion(n, self.spec.label_mix).items():
            labels.extend([label] * count)
        self.rng.shuffle(labels)
        return [self._conn_one(label) for label in labels]

    def _conn_one(self, label: AttackLabel) -> ConnRecord:
        rng = self.rng
        uid = self._uid()
        self.conn_uids.append(uid)
        orig_h = rng.choice(self.local_ips)
        resp_h = rng.choice(self.remote_ips if rng.random() < 0.8 else self.local_ips)
        orig_p = rng.randrange(49152, 65536)
        common = dict(
            ts=self._ts(), uid=uid, orig_h=orig_h, resp_h=resp_h, orig_p=orig_p,
            missed_bytes=0, local_orig=True, local_resp=False, tunnel_parents=None,
            label=label,
        )
        if label is AttackLabel.Benign:
            service = rng.choice(_SERVICES)
            duration = round(rng.uniform(0.05, 120.0), 6)
            orig_pkts = rng.randrange(1, 50)
            resp_pkts = rng.randrange(1, 60)
            orig_bytes = rng.randrange(40, 20_000)
            resp_bytes = rng.randrange(40, 80_000)
            return ConnRecord(
                proto=rng.choice(["tcp", "tcp", "udp"]),
                service=service,
                duration=duration,
                orig_bytes=orig_bytes,
                resp_bytes=resp_bytes,
                conn_state=rng.choice(_STATES_BENIGN),
                history=rng.choice(_HISTORY_BENIGN),
                orig_pkts=orig_pkts,
                orig_ip_bytes=orig_bytes + 40 * orig_pkts,
                resp_pkts=resp_pkts,
                resp_ip_bytes=resp_bytes + 40 * resp_pkts,
                resp_p=rng.choice([80, 443, 53, 123, 8080]),
                **common,
            )
        if label in (AttackLabel.PartOfAHorizontalPortScan, AttackLabel.Okiru, AttackLabel.Mirai):
            # scan-style: single unanswered probe
            orig_pkts = rng.randrange(1, 4)
            return ConnRecord(
                proto="tcp",
                service=None,
                duration=round(rng.uniform(0.000001, 0.01), 6) if rng.random() < 0.4 else None,
                orig_bytes=0,
                resp_bytes=0,
                conn_state="S0",
                history="S",
                orig_pkts=orig_pkts,
                orig_ip_bytes=40 * orig_pkts,
                resp_pkts=0,
                resp_ip_bytes=0,
                resp_p=rng.choice([23, 2323, 81, 8080]),
                **common,
            )
        if label is AttackLabel.DDoS:
            orig_pkts = rng.randrange(500, 5000)
            return ConnRecord(
                proto=rng.choice(["tcp", "udp"]),
                service=None,
                duration=round(rng.uniform(5.0, 300.0), 6),
                orig_bytes=orig_pkts * rng.randrange(40, 120),
                resp_bytes=0,
                conn_state=rng.choice(["S0", "OTH"]),
                history="D",
                orig_pkts=orig_pkts,
                orig_ip_bytes=orig_pkts * 60,
                resp_pkts=0,
                resp_ip_bytes=0,
                resp_p=rng.choice([80, 443]),
                **common,
            )
        if label is AttackLabel.FileDownload:
            resp_bytes = rng.randrange(200_000, 5_000_000)
            resp_pkts = resp_bytes // 1200
            return ConnRecord(
                proto="tcp",
                service="http",
                duration=round(rng.uniform(1.0, 90.0), 6),
                orig_bytes=rng.randrange(100, 600),
                resp_bytes=resp_bytes,
                conn_state="SF",
                history="ShADadFf",
                orig_pkts=rng.randrange(5, 40),
                orig_ip_bytes=rng.randrange(300, 2_400),
                resp_pkts=resp_pkts,
                resp_ip_bytes=resp_bytes + 40 * resp_pkts,
                resp_p=rng.choice([80, 8080]),
                **common,
            )
        # C&C-style periodic traffic: CandC, HeartBeat, Torii, Attack
        orig_bytes = rng.randrange(40, 400) if label is not AttackLabel.HeartBeat else rng.randrange(0, 60)
        resp_bytes = rng.randrange(40, 800) if label is not AttackLabel.HeartBeat else rng.randrange(0, 60)
        orig_pkts = rng.randrange(1, 12)
        resp_pkts = rng.randrange(1, 12)
        return ConnRecord(
            proto="tcp",
            service=rng.choice(["http", "ssl", None]),
            duration=round(rng.uniform(0.1, 10.0), 6),
            orig_bytes=orig_bytes,
            resp_bytes=resp_bytes,
            conn_state=rng.choice(["SF", "RSTO", "S1"]),
            history="ShAdDa",
            orig_pkts=orig_pkts,
            orig_ip_bytes=orig_bytes + 40 * orig_pkts,
            resp_pkts=resp_pkts,
            resp_ip_bytes=resp_bytes + 40 * resp_pkts,
            resp_p=rng.choice([80, 443, 6667, 8080]),
            **common,
        )

    def _uid_for_sub(self) -> str:
        if self.conn_uids and self.rng.random() < 0.5:
            return self.rng.choice(self.conn_uids)
        return self._uid()

    def dns(self, n: int) -> list[ZeekRecord]:
        out = []
        for _ in range(n):
            rng = self.rng
            qtype, qtype_name = rng.choice([(1, "A"), (28, "AAAA"), (12, "PTR"), (16, "TXT")])
            rcode, rcode_name = rng.choice([(0, "NOERROR"), (0, "NOERROR"), (3, "NXDOMAIN")])
            out.append(ZeekRecord(kind="dns", fields=(
                self._ts(), self._uid_for_sub(), rng.choice(self.local_ips),
                rng.randrange(49152, 65536), rng.choice(self.remote_ips), 53, "udp",
                rng.randrange(0, 65536), round(rng.uniform(0.001, 0.4), 6),
                rng.choice(_QUERIES), 1, "C_INTERNET", qtype, qtype_name,
                rcode, rcode_name, rng.random() < 0.1, False, True, rng.random() < 0.9,
                0, rng.choice(["203.0.113.9", "198.51.100.7", ""]),
                float(rng.choice([60, 300, 2523, 3600, 86400])), rcode != 0,
            )))
        return out

    def http(self, n: int) -> list[ZeekRecord]:
        out = []
        for _ in range(n):
            rng = self.rng
            status = rng.choice([200, 200, 200, 404, 301, 500])
            req_len = rng.randrange(0, 1200)
            resp_len = rng.randrange(100, 500_000)
            out.append(ZeekRecord(kind="http", fields=(
                self._ts(), self._uid_for_sub(), rng.choice(self.local_ips),
                rng.randrange(49152, 65536), rng.choice(self.remote_ips),
                rng.choice([80, 8080]), 1, rng.choice(_METHODS),
                rng.choice(_QUERIES), rng.choice(_URIS), None, "1.1",
                rng.choice(["curl/7.81.0", "IoTClient/2.3", "Mozilla/5.0"]), None,
                req_len, resp_len, status,
                "OK" if status == 200 else "Error", None, None, "",
                None, None, None, None, None, None,
                f"F{rng.randrange(10**8):08d}" if rng.random() < 0.4 else None,
                None, rng.choice(["text/html", "application/json", "application/octet-stream"]),
            )))
        return out

    def files(self, n: int) -> list[ZeekRecord]:
        out = []
        for _ in range(n):
            rng = self.rng
            seen = rng.randrange(100, 2_000_000)
            total = seen if rng.random() < 0.8 else None
            out.append(ZeekRecord(kind="files", fields=(
                self._ts(), f"F{rng.randrange(10**8):08d}", self._uid_for_sub(),
                rng.choice(self.local_ips), rng.randrange(49152, 65536),
                rng.choice(self.remote_ips), rng.choice([80, 443]),
                "HTTP", 0, "MD5,SHA1",
                rng.choice(["application/octet-stream", "text/plain", "application/zip"]),
                rng.choice(["firmware.bin", "update.zip", "config.txt", None]),
                round(rng.uniform(0.01, 20.0), 6), False, False,
                seen, total, 0, 0, rng.random() < 0.05, None,
                f"{rng.randrange(16**8):08x}" * 4, None, None, None, False, None,
            )))
        return out

    def ntp(self, n: int) -> list[ZeekRecord]:
        out = []
        for _ in range(n):
            rng = self.rng
            ts = self._ts()
            out.append(ZeekRecord(kind="ntp", fields=(
                ts, self._uid_for_sub(), rng.choice(self.local_ips),
                rng.randrange(49152, 65536), rng.choice(self.remote_ips), 123,
                4, 3, rng.choice([2, 3, 4]), 6.0, round(rng.uniform(-20.0, -5.0), 6),
                round(rng.uniform(0.0, 0.2), 6), round(rng.uniform(0.0, 0.1), 6),
                rng.choice(["203.0.113.9", "GPS", "POOL"]),
                ts - timedelta(seconds=rng.randrange(1, 3600)),
                ts - timedelta(milliseconds=rng.randrange(1, 500)),
                ts - timedelta(milliseconds=rng.randrange(1, 400)),
                ts, 0,
            )))
        return out

    def weird(self, n: int) -> list[ZeekRecord]:
        out = []
        for _ in range(n):
            rng = self.rng
            out.append(ZeekRecord(kind="weird", fields=(
                self._ts(), self._uid_for_sub(), rng.choice(self.local_ips),
                rng.randrange(49152, 65536), rng.choice(self.remote_ips),
                rng.choice([80, 443, 53]), rng.choice(_WEIRD_NAMES),
                None, False, "zeek", "IP",
            )))
        return out

    def sensor(self, sensor_type: str, n: int) -> list[SensorReading]:
        rng = self.rng
        ranges = {
            "humidity": (20.0, 70.0),
            "co2": (350.0, 1400.0),
            "temperature": (17.0, 29.0),
            "luminosity": (0.0, 900.0),
        }
        out = []
        for _ in range(n):
            room = rng.choice(self.rooms)
            if sensor_type == "motion":
                value: float = rng.randrange(2)
            else:
                lo, hi = ranges[sensor_type]
                value = round(rng.uniform(lo, hi), 2)
            out.append(SensorReading(sensor_type=sensor_type, room=room, ts=self._ts(), value=value))
        return out

    def devices(self, n: int) -> list[dict]:
        rng = self.rng
        out = []
        for i in range(n):
            vendor = rng.choice(_VENDORS)
            dtype = rng.choice(_DEVICE_TYPES)
            room = rng.choice(self.rooms)
            install = self.spec.window[0] - timedelta(days=rng.randrange(30, 400))
            out.append({
                "device_id": f"D{i:04d}",
                "name": f"{dtype}-{room}-{i:02d}",
                "type": dtype,
                "vendor": vendor,
                "model": f"{vendor[:2].upper()}-{rng.randrange(100, 999)}",
                "firmware_version": f"{rng.randrange(1, 4)}.{rng.randrange(0, 10)}.{rng.randrange(0, 20)}",
                "mac": ":".join(f"{rng.randrange(256):02x}" for _ in range(6)),
                "ip": self.local_ips[i % len(self.local_ips)],
                "room": room,
                "floor": int(room[1]),
                "install_ts": install,
                "last_seen_ts": self._ts(),
                "status": rng.choice(["online", "online", "online", "offline"]),
                "battery_level": rng.randrange(5, 101),
                "network_segment": rng.choice(["iot-a", "iot-b", "guest"]),
                "is_gateway": dtype == "hub",
            })
        return out


def synthesize_logs(spec: SynthSpec) -> dict[str, list]:
    """Generate records per kind, deterministically from the spec's seed.

    Kinds are generated in a fixed order so the same spec always yields the
    same records regardless of dict ordering in ``counts``.
    """
    spec.validate()
    synth = _Synth(spec)
    out: dict[str, list] = {}
    for kind in ALL_KINDS:
        n = spec.counts.get(kind, 0)
        if kind == "conn":
            out[kind] = synth.conn(n)
        elif kind in ZEEK_ORDER:
            out[kind] = getattr(synth, kind)(n)
        elif kind in SENSOR_TYPES:
            out[kind] = synth.sensor(kind, n)
        else:
            out[kind] = synth.devices(n)
    return out


def device_rows(devices: list[dict]) -> list[tuple]:
    order = ("device_id", "name", "type", "vendor", "model", "firmware_version",
             "mac", "ip", "room", "floor", "install_ts", "last_seen_ts", "status",
             "battery_level", "network_segment", "is_gateway")
    return [tuple(d[k] for k in order) for d in devices]


def serialize_devices(devices: list[dict]) -> str:
    order = ("device_id", "name", "type", "vendor", "model", "firmware_version",
             "mac", "ip", "room", "floor", "install_ts", "last_seen_ts", "status",
             "battery_level", "network_segment", "is_gateway")
    lines = [",".join(order)]
    for d in devices:
        rendered = []
        for k in order:
            v = d[k]
            if isinstance(v, datetime):
                rendered.append(v.isoformat())
            elif isinstance(v, bool):
                rendered.append("T" if v else "F")
            else:
                rendered.append(str(v))
        lines.append(",".join(rendered))
    return "\n".join(lines) + "\n"


def parse_devices(stream) -> list[dict]:
    if isinstance(stream, str):
        lines = stream.splitlines()
    elif hasattr(stream, "read"):
        lines = stream.read().splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    if not lines:
        return []
    header = lines[0].split(",")
    out = []
    for raw in lines[1:]:
        if not raw.strip():
            continue
        values = raw.split(",", len(header) - 1)
        d: dict = dict(zip(header, values))
        d["floor"] = int(d["floor"])
        d["battery_level"] = int(d["battery_level"])
        d["install_ts"] = datetime.fromisoformat(d["install_ts"])
        d["last_seen_ts"] = datetime.fromisoformat(d["last_seen_ts"])
        d["is_gateway"] = d["is_gateway"] == "T"
        out.append(d)
    return out
