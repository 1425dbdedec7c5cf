#!/usr/bin/env python3
"""Regenerate the shipped gluing tables under crates/core/data/manifolds.

Each table lists polygonal faces and the pairing of their sides. Sides of a
face are numbered cyclically; `glue fA sA fB sB N` identifies corner sA of fA
with corner sB+1 of fB (orientation compatible), `R` identifies corner sA with
corner sB (the side is reversed first).

Usage: python3 tools/gen_gluing_tables.py [output-dir]
"""
import itertools
import math
import os
import random
import sys

SQ3 = math.sqrt(3.0)


def write_table(path, title, faces, glues):
    with open(path, "w") as f:
        f.write(f"# {title}\n")
        f.write(f"faces {len(faces)}\n")
        for i, s in enumerate(faces):
            f.write(f"face {i} {s}\n")
        for g in glues:
            f.write("glue %d %d %d %d %s\n" % g)


# ---------------------------------------------------------------------------
# regular maps from finite groups: darts are group elements, faces are cosets
# of <x>, and the edge involution is right multiplication by x*y.


def regular_map(elements, mul, x, y):
    e = mul(x, y)
    face_of, side_of, faces = {}, {}, []
    for g in elements:
        if g in face_of:
            continue
        fid = len(faces)
        d, k = g, 0
        while d not in face_of:
            face_of[d] = fid
            side_of[d] = k
            d = mul(d, x)
            k += 1
        faces.append(k)
    glues, seen = [], set()
    for g in elements:
        if g in seen:
            continue
        h = mul(g, e)
        seen.add(g)
        seen.add(h)
        glues.append((face_of[g], side_of[g], face_of[h], side_of[h], "N"))
    return faces, glues


def matrix_group(q, projective, det_one):
    els = []
    for a, b, c, d in itertools.product(range(q), repeat=4):
        det = (a * d - b * c) % q
        if det == 0 or (det_one and det != 1):
            continue
        m = (a, b, c, d)
        if projective:
            neg = tuple((-v) % q for v in m)
            m = min(m, neg)
        els.append(m)
    els = sorted(set(els))

    def mul(m, n):
        a, b, c, d = m
        e, f, g, h = n
        r = ((a * e + b * g) % q, (a * f + b * h) % q, (c * e + d * g) % q, (c * f + d * h) % q)
        if projective:
            neg = tuple((-v) % q for v in r)
            r = min(r, neg)
        return r

    ident = (1, 0, 0, 1)
    return els, mul, ident


def order(m, mul, ident):
    k, r = 1, m
    while r != ident:
        r = mul(r, m)
        k += 1
    return k


def generated(gens, mul, ident):
    seen = {ident}
    stack = [ident]
    while stack:
        g = stack.pop()
        for s in gens:
            h = mul(g, s)
            if h not in seen:
                seen.add(h)
                stack.append(h)
    return len(seen)


def triangle_quotient(q, projective, det_one, p):
    els, mul, ident = matrix_group(q, projective, det_one)
    ords = {g: order(g, mul, ident) for g in els}
    for x in els:
        if ords[x] != p:
            continue
        for y in els:
            if ords[y] != 3 or ords[mul(x, y)] != 2:
                continue
            if generated([x, y], mul, ident) == len(els):
                return regular_map(els, mul, x, y)
    raise RuntimeError("no generating pair")


# ---------------------------------------------------------------------------
# covers and quotients of gluing tables


def orientation_double_cover(faces, glues):
    """Faces f and f+n carry opposite orientations; side s of f+n is side
    (-s-1) mod p of f traversed backwards."""
    n = len(faces)
    out = []
    for fa, sa, fb, sb, r in glues:
        pa, pb = faces[fa], faces[fb]
        ra, rb = (-sa - 1) % pa, (-sb - 1) % pb
        if r == "N":
            out.append((fa, sa, fb, sb, "N"))
            out.append((fa + n, ra, fb + n, rb, "N"))
        else:
            out.append((fa, sa, fb + n, rb, "N"))
            out.append((fa + n, ra, fb, sb, "N"))
    return faces + faces, out


def z2_cover(faces, glues, voltage):
    """Two sheets; gluings with voltage 1 swap the sheets."""
    n = len(faces)
    out = []
    for i, (fa, sa, fb, sb, r) in enumerate(glues):
        v = voltage[i]
        for sheet in (0, 1):
            other = sheet ^ v
            out.append((fa + n * sheet, sa, fb + n * other, sb, r))
    return faces + faces, out


def vertex_gluings(faces, glues):
    """For each vertex, the indices of the gluings passing through it."""
    parent = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for fa, sa, fb, sb, r in glues:
        pa, pb = faces[fa], faces[fb]
        a0, a1 = (fa, sa), (fa, (sa + 1) % pa)
        b0, b1 = (fb, sb), (fb, (sb + 1) % pb)
        pairs = [(a0, b1), (a1, b0)] if r == "N" else [(a0, b0), (a1, b1)]
        for u, v in pairs:
            parent[find(u)] = find(v)
    verts = {}
    for i, (fa, sa, fb, sb, r) in enumerate(glues):
        pa = faces[fa]
        for c in ((fa, sa), (fa, (sa + 1) % pa)):
            verts.setdefault(find(c), []).append(i)
    return list(verts.values())


def cocycle_voltage(faces, glues):
    """A Z2 voltage on gluings summing to zero around every vertex whose
    double cover is connected (a nonzero class in H^1)."""
    m = len(glues)
    rows = []
    for gl in vertex_gluings(faces, glues):
        v = 0
        for i in gl:
            v ^= 1 << i
        rows.append(v)
    # reduced row echelon over GF(2)
    pivots = []
    for r in rows:
        for pv, pr in pivots:
            if r >> pv & 1:
                r ^= pr
        if r:
            pv = r.bit_length() - 1
            pivots = [(q, qr ^ r if qr >> pv & 1 else qr) for q, qr in pivots]
            pivots.append((pv, r))
    pivot_cols = {pv for pv, _ in pivots}
    free = [c for c in range(m) if c not in pivot_cols]
    for fcol in free:
        v = 1 << fcol
        for pv, pr in pivots:
            if pr >> fcol & 1:
                v |= 1 << pv
        volt = [v >> i & 1 for i in range(m)]
        cover = z2_cover(faces, glues, volt)
        if connected(*cover):
            return volt
    raise RuntimeError("surface is simply connected")


def euler(faces, glues):
    """V - E + F for a table whose vertices are computed from corner cycles."""
    parent = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for fa, sa, fb, sb, r in glues:
        pa, pb = faces[fa], faces[fb]
        a0, a1 = (fa, sa), (fa, (sa + 1) % pa)
        b0, b1 = (fb, sb), (fb, (sb + 1) % pb)
        pairs = [(a0, b1), (a1, b0)] if r == "N" else [(a0, b0), (a1, b1)]
        for u, v in pairs:
            parent[find(u)] = find(v)
    corners = [(f, k) for f, p in enumerate(faces) for k in range(p)]
    v = len({find(c) for c in corners})
    return v - len(glues) + len(faces)


# ---------------------------------------------------------------------------
# quotients of the hexagonal tiling by a group acting on the plane


def torus_reducer(v1, v2):
    """Reduce plane points modulo the translations v1, v2."""
    det = v1[0] * v2[1] - v1[1] * v2[0]

    def reduce(pt):
        a = (pt[0] * v2[1] - pt[1] * v2[0]) / det
        b = (v1[0] * pt[1] - v1[1] * pt[0]) / det
        fa, fb = math.floor(a + 1e-9), math.floor(b + 1e-9)
        dx = -fa * v1[0] - fb * v2[0]
        dy = -fa * v1[1] - fb * v2[1]
        return (pt[0] + dx, pt[1] + dy), False, lambda q: (q[0] + dx, q[1] + dy)

    return reduce


def hex_lattice_quotient_general(reduce, centers):
    def key(pt):
        return (round(pt[0] * 4), round(pt[1] * 4 / SQ3))

    R = 1 / SQ3
    offs = [(R * math.cos(math.radians(30 + 60 * k)), R * math.sin(math.radians(30 + 60 * k))) for k in range(6)]
    face_id = {}
    corners = []
    faces = []
    for c in centers:
        rep, _, _ = reduce(c)
        k = key(rep)
        if k in face_id:
            continue
        face_id[k] = len(corners)
        corners.append([(rep[0] + dx, rep[1] + dy) for dx, dy in offs])
        faces.append(6)
    glues, seen = [], set()
    for f, cs in enumerate(corners):
        cx = sum(p[0] for p in cs) / 6
        cy = sum(p[1] for p in cs) / 6
        for s in range(6):
            if (f, s) in seen:
                continue
            a, b = cs[s], cs[(s + 1) % 6]
            mx, my = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
            nb = (2 * mx - cx, 2 * my - cy)
            rep, _, mapv = reduce(nb)
            g = face_id[key(rep)]
            ia, ib = mapv(a), mapv(b)
            gs = corners[g]
            sb = kind = None
            for t in range(6):
                p0, p1 = gs[t], gs[(t + 1) % 6]
                if key(p0) == key(ia) and key(p1) == key(ib):
                    sb, kind = t, "R"
                    break
                if key(p0) == key(ib) and key(p1) == key(ia):
                    sb, kind = t, "N"
                    break
            assert sb is not None
            seen.add((f, s))
            seen.add((g, sb))
            glues.append((f, s, g, sb, kind))
    return faces, glues


def klein_reducer(cols, rows):
    """x -> x + cols, and the glide (x, y) -> (-x, y + rows*sqrt3/2)."""
    h = rows * SQ3 / 2

    def reduce(pt):
        k = math.floor(pt[1] / h + 1e-9)
        flip = k % 2 == 1
        dy = -k * h

        def mapv(q):
            x = -q[0] if flip else q[0]
            return (x, q[1] + dy)

        x, y = mapv(pt)
        fx = math.floor((x + 0.25) / cols + 1e-9)
        dx = -fx * cols

        def full(q):
            x, y = mapv(q)
            return (x + dx, y)

        return full(pt), flip, full

    return reduce


def offset_centers(cols, rows):
    return [(i + 0.5 * (j % 2), j * SQ3 / 2) for j in range(rows) for i in range(cols)]


# ---------------------------------------------------------------------------
# small surfaces found by search


def corner_links(p, glue):
    fa, sa, fb, sb, r = glue
    a0, a1 = (fa, sa), (fa, (sa + 1) % p)
    b0, b1 = (fb, sb), (fb, (sb + 1) % p)
    return [(a0, b1), (a1, b0)] if r == "N" else [(a0, b0), (a1, b1)]


def valence_ok(nfaces, p, glues):
    """Corner classes hold at most three corners; closed ones exactly three."""
    adj = {(f, k): [] for f in range(nfaces) for k in range(p)}
    for g in glues:
        for u, v in corner_links(p, g):
            adj[u].append(v)
            adj[v].append(u)
    seen = set()
    for c in adj:
        if c in seen:
            continue
        comp, stack = [], [c]
        seen.add(c)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(comp) > 3:
            return False
        if all(len(adj[u]) == 2 for u in comp) and len(comp) != 3:
            return False
    return True


def search_trivalent(nfaces, p, orientable, seed, node_budget=5000):
    """Randomized backtracking (most constrained side first) for a gluing of
    `nfaces` p-gons with every vertex of valence 3 and no face glued to itself."""
    rng = random.Random(seed)
    sides = [(f, s) for f in range(nfaces) for s in range(p)]
    kinds = ["N"] if orientable else ["N", "R"]

    def options(glues, used, a):
        out = []
        for b in sides:
            if b in used or b[0] == a[0]:
                continue
            for k in kinds:
                g = (a[0], a[1], b[0], b[1], k)
                if valence_ok(nfaces, p, glues + [g]):
                    out.append(g)
        return out

    def rec(glues, used, budget):
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        free = [s for s in sides if s not in used]
        if not free:
            return glues
        best = None
        for a in free:
            c = options(glues, used, a)
            if best is None or len(c) < len(best):
                best = c
            if len(c) <= 1:
                break
        rng.shuffle(best)
        for g in best:
            r = rec(glues + [g], used | {(g[0], g[1]), (g[2], g[3])}, budget)
            if r:
                return r
        return None

    faces = [p] * nfaces
    while True:
        glues = rec([], frozenset(), [node_budget])
        if glues and connected(faces, glues) and is_orientable(faces, glues) == orientable:
            return faces, glues


def connected(faces, glues):
    adj = {i: set() for i in range(len(faces))}
    for fa, _, fb, _, _ in glues:
        adj[fa].add(fb)
        adj[fb].add(fa)
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(faces)


def is_orientable(faces, glues):
    sign = {0: 1}
    adj = {i: [] for i in range(len(faces))}
    for fa, _, fb, _, r in glues:
        w = 1 if r == "N" else -1
        adj[fa].append((fb, w))
        adj[fb].append((fa, w))
    stack = [0]
    while stack:
        u = stack.pop()
        for v, w in adj[u]:
            want = sign[u] * w
            if v not in sign:
                sign[v] = want
                stack.append(v)
            elif sign[v] != want:
                return False
    return True


# ---------------------------------------------------------------------------
# elliptic plane: dodecahedron modulo the antipodal map


def hemi_dodecahedron():
    phi = (1 + math.sqrt(5)) / 2
    ico = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            ico += [(0, s1, s2 * phi), (s1, s2 * phi, 0), (s2 * phi, 0, s1)]
    # dodecahedron faces <-> icosahedron vertices; dodecahedron vertices <->
    # icosahedron triangles
    def d2(a, b):
        return sum((x - y) ** 2 for x, y in zip(a, b))

    tris = []
    for a, b, c in itertools.combinations(range(12), 3):
        if all(abs(d2(ico[u], ico[v]) - 4) < 1e-9 for u, v in ((a, b), (b, c), (a, c))):
            tris.append((a, b, c))
    cen = [tuple(sum(ico[i][k] for i in t) / 3 for k in range(3)) for t in tris]

    def cross(u, v):
        return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])

    def dot(u, v):
        return sum(a * b for a, b in zip(u, v))

    face_vs = []
    for f in range(12):
        n = ico[f]
        vs = [i for i, t in enumerate(tris) if f in t]
        # sort ccw around the outward normal
        ref = tuple(cen[vs[0]][k] - n[k] / dot(n, n) * dot(cen[vs[0]], n) for k in range(3))
        def ang(i):
            c = cen[i]
            pr = tuple(c[k] - n[k] / dot(n, n) * dot(c, n) for k in range(3))
            return math.atan2(dot(cross(ref, pr), n), dot(ref, pr))
        vs.sort(key=ang)
        face_vs.append(vs)
    anti_v = {}
    for i, c in enumerate(cen):
        for j, d in enumerate(cen):
            if d2(c, tuple(-x for x in d)) < 1e-9:
                anti_v[i] = j
    anti_f = {}
    for i, c in enumerate(ico):
        for j, d in enumerate(ico):
            if d2(c, tuple(-x for x in d)) < 1e-9:
                anti_f[i] = j
    reps = []
    for f in range(12):
        if anti_f[f] not in reps:
            reps.append(f)
    idx = {f: i for i, f in enumerate(reps)}
    glues, seen = [], set()
    for f in reps:
        vs = face_vs[f]
        for s in range(5):
            if (idx[f], s) in seen:
                continue
            a, b = vs[s], vs[(s + 1) % 5]
            g = next(h for h in range(12) if h != f and a in face_vs[h] and b in face_vs[h])
            if g in idx:
                ia, ib, h = a, b, g
            else:
                ia, ib, h = anti_v[a], anti_v[b], anti_f[g]
            ws = face_vs[h]
            for t in range(5):
                p0, p1 = ws[t], ws[(t + 1) % 5]
                if (p0, p1) == (ia, ib):
                    kind = "R"
                    break
                if (p0, p1) == (ib, ia):
                    kind = "N"
                    break
            seen.add((idx[f], s))
            seen.add((idx[h], t))
            glues.append((idx[f], s, idx[h], t, kind))
    return [5] * 6, glues


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "crates", "core", "data", "manifolds")
    os.makedirs(out, exist_ok=True)
    tables = {}

    tables["elliptic"] = ("elliptic plane: dodecahedron modulo the antipodal map", *hemi_dodecahedron())
    tables["kq"] = ("Klein quartic: 24 heptagons, rotation group PSL(2,7)",
                    *triangle_quotient(7, True, True, 7))
    bolza = triangle_quotient(3, False, False, 8)
    tables["bolza"] = ("Bolza surface: 6 octagons, rotation group GL(2,3)", *bolza)
    volt = cocycle_voltage(*bolza)
    tables["bolza2"] = ("double cover of the Bolza surface: 12 octagons", *z2_cover(bolza[0], bolza[1], volt))
    minimal = search_trivalent(6, 7, False, 2)
    tables["minimal"] = ("minimal non-orientable hyperbolic quotient: 6 heptagons", *minimal)
    tables["zebra"] = ("orientable double cover of the minimal quotient: 12 heptagons",
                       *orientation_double_cover(*minimal))
    tables["torus-hex"] = ("hexagonal torus, axial coordinates modulo 23",
                           *hex_lattice_quotient_general(torus_reducer((23.0, 0.0), (11.5, 23 * SQ3 / 2)),
                                                         [(q + r / 2, r * SQ3 / 2) for r in range(23) for q in range(23)]))
    tables["torus-sq"] = ("square torus: 20 hexagons by 26 rows",
                          *hex_lattice_quotient_general(torus_reducer((20.0, 0.0), (0.0, 26 * SQ3 / 2)),
                                                        offset_centers(20, 26)))
    tables["torus-rec"] = ("rectangular torus: 29 hexagons by 18 rows",
                           *hex_lattice_quotient_general(torus_reducer((29.0, 0.0), (0.0, 18 * SQ3 / 2)),
                                                         offset_centers(29, 18)))
    tables["klein-sq"] = ("Klein bottle: 20 hexagons by 26 rows, vertical gluing mirrored",
                          *hex_lattice_quotient_general(klein_reducer(20, 26), offset_centers(20, 26)))
    for name, (title, faces, glues) in tables.items():
        print(name, len(faces), "faces", len(glues), "glues", "chi", euler(faces, glues),
              "orientable", is_orientable(faces, glues))
        write_table(os.path.join(out, name + ".glue"), title, faces, glues)


if __name__ == "__main__":
    main()
