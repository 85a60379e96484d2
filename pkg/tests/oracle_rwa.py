"""Exhaustive feasibility oracle for the wavelength/quantum assignment problem.

Deliberately independent of the planner: feasibility is decided by brute
force over every wavelength colouring, with the structural constraints
restated from scratch (per-output-port wavelength distinctness, one quantum
channel per node output, per-request modulation feasibility inside the
secured power budget).
"""

import itertools

from qsnet.optical import coexistence_window
from qsnet.planner import MODULATIONS_DENSEST_FIRST


def _modulation_feasible(secured: bool, path_class, table, cap_dbm: float) -> bool:
    if not secured:
        return True  # the unsecured default operating point always closes the link here
    for modulation in MODULATIONS_DENSEST_FIRST:
        window = coexistence_window(modulation, 1, path_class, table)
        if window is None:
            continue
        if min(window[1], cap_dbm) >= max(window[0], -35.0):
            return True
    return False


def feasible(requests, topology, table) -> bool:
    """True iff some complete assignment satisfies every constraint."""
    cap = topology.secured_power_cap_dbm
    secured = [r for r in requests if r.secured]
    # quantum structure: pairwise-distinct Alices and Bobs among secured links
    alices = [min(r.src_island, r.dst_island) for r in secured]
    bobs = [max(r.src_island, r.dst_island) for r in secured]
    if len(set(alices)) != len(alices) or len(set(bobs)) != len(bobs):
        return False
    for r in secured:
        path_class = topology.quantum_path_class(min(r.src_island, r.dst_island),
                                                 max(r.src_island, r.dst_island))
        if not _modulation_feasible(True, path_class, table, cap):
            return False
    grid = topology.grid_thz
    if topology.single_wavelength_per_ns:
        for colours in itertools.product(grid, repeat=len(requests)):
            used: dict[int, set[float]] = {}
            ok = True
            for r, colour in zip(requests, colours):
                for island in (r.src_island, r.dst_island):
                    if colour in used.setdefault(island, set()):
                        ok = False
                        break
                    used[island].add(colour)
                if not ok:
                    break
            if ok:
                return True
        return False
    for colours in itertools.product(grid, repeat=2 * len(requests)):
        used = {}
        ok = True
        for i, r in enumerate(requests):
            fwd, rev = colours[2 * i], colours[2 * i + 1]
            for island, colour in ((r.dst_island, fwd), (r.src_island, rev)):
                if colour in used.setdefault(island, set()):
                    ok = False
                    break
                used[island].add(colour)
            if not ok:
                break
        if ok:
            return True
    return False
