"""Independent reference computations for the tests.

Nothing here calls the package's BFS, area search or reduction code: the
only shared pieces are the group oracles (multiplication tables are ground
truth) and the letter dataclasses.
"""
import itertools

from relhyp.words import HLetter, XGen


def letter_values(rs, pools):
    out = []
    for name in rs.x_names:
        out += [rs.x_value(name, 1), rs.x_value(name, -1)]
    for lam in rs.lambdas:
        out += [rs.embed(lam, h) for h in pools[lam]]
    return out


def brute_force_lengths(rs, pools, radius):
    """Shortest word length per canonical key, by evaluating every word."""
    G = rs.G
    vals = letter_values(rs, pools)
    out = {}
    for n in range(radius + 1):
        for combo in itertools.product(vals, repeat=n):
            g = G.identity()
            for v in combo:
                g = G.multiply(g, v)
            out.setdefault(G.canonical_key(g), n)
    return out


def free_reduce(letters, oracles):
    """Normal form in the free product F(X) * (*H_lambda), written from scratch."""
    stack = []
    for x in letters:
        if isinstance(x, HLetter):
            H = oracles[x.lam]
            if H.is_identity(x.elem):
                continue
            if stack and isinstance(stack[-1], HLetter) and stack[-1].lam == x.lam:
                prod = H.multiply(stack.pop().elem, x.elem)
                if not H.is_identity(prod):
                    stack.append(HLetter(x.lam, prod))
                continue
        elif stack and isinstance(stack[-1], XGen) and stack[-1].name == x.name \
                and stack[-1].sign == -x.sign:
            stack.pop()
            continue
        stack.append(x)
    return tuple(stack)


def inverse_letters(letters, oracles):
    out = []
    for x in reversed(letters):
        if isinstance(x, XGen):
            out.append(XGen(x.name, -x.sign))
        else:
            out.append(HLetter(x.lam, oracles[x.lam].invert(x.elem)))
    return tuple(out)


def derivation_areas(relators, conjugators, oracles, n_max):
    """Map reduced word -> least number of conjugated relators producing it.

    Conjugated relators are f R^(+-1) f^-1 for every rotation of R and every
    f in ``conjugators`` (plus the empty conjugator).  Products are built level
    by level as sets, so level k holds every word reachable with k factors.
    """
    pieces = set()
    conj = [()] + [tuple(f) for f in conjugators]
    for r in relators:
        r = tuple(r)
        for s in (r, inverse_letters(r, oracles)):
            for i in range(len(s)):
                rot = s[i:] + s[:i]
                for f in conj:
                    pieces.add(free_reduce(f + rot + inverse_letters(f, oracles), oracles))
    best = {(): 0}
    level = {()}
    for k in range(1, n_max + 1):
        nxt = set()
        for w in level:
            for p in pieces:
                v = free_reduce(w + p, oracles)
                if v not in best:
                    best[v] = k
                    nxt.add(v)
        level = nxt
    return best


def ball_graph(ball):
    import networkx as nx
    g = nx.DiGraph()
    g.add_nodes_from(range(len(ball)))
    for i, nbrs in enumerate(ball.adj):
        for _, j in nbrs:
            g.add_edge(i, j)
    return g


def brute_force_delta(ball, corners):
    """Thin-triangle constant over all corner triples and all geodesic choices."""
    import networkx as nx
    g = ball_graph(ball)
    dist = dict(nx.all_pairs_shortest_path_length(g))
    paths = {}

    def geos(a, b):
        if (a, b) not in paths:
            paths[(a, b)] = [set(p) for p in nx.all_shortest_paths(g, a, b)]
        return paths[(a, b)]

    worst = 0
    for x, y, z in itertools.combinations(corners, 3):
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            for side in geos(a, b):
                for s1 in geos(a, c):
                    for s2 in geos(b, c):
                        other = s1 | s2
                        d = max(min(dist[p][q] for q in other) for p in side)
                        worst = max(worst, d)
    return worst
