"""Network builders shared by the unit and acceptance tests."""
from rnsens.model import MassActionPoly, ReactionNetwork

IMMIGRATION2 = ReactionNetwork(
    ((1, 0), (0, 1)),
    (MassActionPoly(((1.0, (1,)),), (0, 0)), MassActionPoly(((2.0, (1,)),), (0, 0))),
    1,
)


def random_network(rng, d=2, K=4, p=3):
    props, stoich = [], []
    for _ in range(K):
        terms = []
        for _ in range(rng.randint(1, 3)):
            terms.append((rng.uniform(-2, 2), tuple(rng.randint(0, 2) for _ in range(p))))
        props.append(MassActionPoly(tuple(terms), tuple(rng.randint(0, 2) for _ in range(d))))
        stoich.append(tuple(rng.randint(-1, 1) for _ in range(d)))
    return ReactionNetwork(tuple(stoich), tuple(props), p)


def consistent_network(rng, d=2, K=4):
    """Random mass-action network whose reactions never underflow."""
    props, stoich = [], []
    for _ in range(K):
        orders = tuple(rng.randint(0, 2) for _ in range(d))
        props.append(MassActionPoly(((rng.uniform(0.1, 3.0), (1,)),), orders))
        # only reactant-free reactions produce, so populations stay bounded
        top = 1 if sum(orders) == 0 else 0
        stoich.append(tuple(rng.randint(-o, top) for o in orders))
    return ReactionNetwork(tuple(stoich), tuple(props), 1)
