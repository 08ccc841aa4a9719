"""
Chain states and attacker moves
===============================

The unsettled part of the tree is summarized by ``(delta, hs, n)``: the
private lead, the number of tied public subtrees and the number of leaves
honest pools can extend.  This script lists the reachable states for a few
strategies and prints the outgoing arcs of one state.
"""

from stubborn_ghost import Strategy, attacker_action, enumerate_reachable, successors
from stubborn_ghost.state_space import BlockEvent, ChainState, KIND_HP1

# how many states each strategy can reach with leads capped at 10
for name in ("S", "L", "T", "LFT"):
    space = enumerate_reachable(Strategy.from_name(name), delta_max=10)
    trailing = [s.label() for s in space.states if s.trailing]
    print(f"{name:>4}: {len(space):3d} states, trailing ones: {trailing}")

# lead 2 over two public subtrees, one honest block on a public leaf
state = ChainState(2, 2, 3)
event = BlockEvent(KIND_HP1, "pub")
for name in ("S", "L"):
    print(f"{name} in {state.label()} after {event}: {attacker_action(state, event, Strategy.from_name(name))}")

# every arc out of the tie state for the equal-fork strategy
print("\narcs out of (0',1,2) under F")
for tr in successors(ChainState(0, 1, 2, "'"), Strategy.from_name("F")):
    print(f"  {str(tr.event):<12} w={tr.weight:.3f} -> {tr.next.label():<9} "
          f"{tr.action:<18} fate={tr.fate}")

# the full adjacency listing is available for audits
print()
print(enumerate_reachable(Strategy.from_name("T"), delta_max=5).dump()[:600])
