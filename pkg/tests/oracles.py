"""Independent reference implementations used as test oracles.

Everything here works on explicit Python sets and direct quantifier
expansion, sharing no code with the package beyond its data classes.
"""

from itertools import product


def subsets(n):
    return range(1 << n)


def alpha_family(game, s, G):
    """X in E(G)(s) iff some joint action of G forces the outcome into X."""
    acts = game.actions[s]
    n = len(acts)
    members = [i for i in range(n) if G >> i & 1]
    others = [i for i in range(n) if not G >> i & 1]
    fam = set()
    for X in subsets(game.n_states):
        for mine in product(*(range(acts[i]) for i in members)):
            ok = True
            for theirs in product(*(range(acts[i]) for i in others)):
                prof = [0] * n
                for i, a in zip(members, mine):
                    prof[i] = a
                for i, a in zip(others, theirs):
                    prof[i] = a
                idx = 0
                for i in range(n):
                    idx = idx * acts[i] + prof[i]
                if not X >> game.outcomes[s][idx] & 1:
                    ok = False
                    break
            if ok:
                fam.add(X)
                break
    return fam


def failing_conditions(fams, n_states, n_agents):
    """Names of E1-E6 that fail; ``fams[s][G]`` is a set of state masks."""
    full = (1 << n_states) - 1
    grand = (1 << n_agents) - 1
    bad = set()
    for s in range(n_states):
        E = fams[s]
        for G in subsets(n_agents):
            if 0 in E[G]:
                bad.add("E1")
            if full not in E[G]:
                bad.add("E2")
            for X in E[G]:
                for Y in subsets(n_states):
                    if X & ~Y == 0 and Y not in E[G]:
                        bad.add("E4")
        for X in subsets(n_states):
            if (full & ~X) not in E[0] and X not in E[grand]:
                bad.add("E3")
        for G1 in subsets(n_agents):
            for G2 in subsets(n_agents):
                if G1 & G2:
                    continue
                for X in E[G1]:
                    for Y in E[G2]:
                        if X & Y not in E[G1 | G2]:
                            bad.add("E5")
        core = [X for X in E[0] if not any(Y != X and Y & ~X == 0 for Y in E[0])]
        if not core:
            bad.add("E6")
    return bad


def reachable(partitions, n_states, s):
    """States reachable from s in one or more steps along the union."""
    seen, frontier = set(), {s}
    while frontier:
        nxt = set()
        for t in frontier:
            for part in partitions:
                for block in part:
                    if block >> t & 1:
                        nxt.update(u for u in range(n_states) if block >> u & 1)
        frontier = nxt - seen
        seen |= nxt
    return seen


def same_block(part, s, t):
    return any(b >> s & 1 and b >> t & 1 for b in part)
