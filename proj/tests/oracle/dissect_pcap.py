#!/usr/bin/env python3
"""Independent pcap dissector: prints one 'srchex dsthex' line per IPv4 packet.

Reads classic pcap (all four magic variants), walks Ethernet/802.1Q or raw-IP
framing with struct.unpack, and emits the IPv4 source/destination pair of
every IPv4 packet in file order. Used to cross-check captures produced by
the C++ writer. Shares no code with src/.

Usage: dissect_pcap.py <capture.pcap> [...]
"""

import struct
import sys


def dissect(path):
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 24:
        raise SystemExit(f"{path}: truncated global header")
    magic = data[:4]
    if magic == b"\xd4\xc3\xb2\xa1" or magic == b"\x4d\x3c\xb2\xa1":
        endian = "<"
    elif magic == b"\xa1\xb2\xc3\xd4" or magic == b"\xa1\xb2\x3c\x4d":
        endian = ">"
    else:
        raise SystemExit(f"{path}: unknown magic {magic.hex()}")
    _, _, _, _, snaplen, linktype = struct.unpack(endian + "HHiIII", data[4:24])

    off = 24
    while off + 16 <= len(data):
        _, _, incl, _ = struct.unpack(endian + "IIII", data[off:off + 16])
        off += 16
        if off + incl > len(data) or incl > snaplen:
            break
        pkt = data[off:off + incl]
        off += incl
        ip_off = None
        if linktype == 1:
            pos = 12
            while pos + 2 <= len(pkt):
                etype = struct.unpack(">H", pkt[pos:pos + 2])[0]
                if etype in (0x8100, 0x88A8):
                    pos += 4
                    continue
                if etype == 0x0800:
                    ip_off = pos + 2
                break
        elif linktype == 101:
            if len(pkt) >= 1 and (pkt[0] >> 4) == 4:
                ip_off = 0
        if ip_off is None or ip_off + 20 > len(pkt):
            continue
        src = struct.unpack(">I", pkt[ip_off + 12:ip_off + 16])[0]
        dst = struct.unpack(">I", pkt[ip_off + 16:ip_off + 20])[0]
        print(f"{src:08x} {dst:08x}")


def main():
    for path in sys.argv[1:]:
        dissect(path)


if __name__ == "__main__":
    main()
