"""
On-line permissive supervisory control of discrete event systems.

The off-line stage translates an scLTL specification into a DFA, composes
it with the plant and ranks every product state. The on-line stage issues
a control pattern after each observed event, trading permissiveness for
progress as a schedule decays.
"""

__all__ = [
    "cli",
    "config",
    "des",
    "dfa",
    "errors",
    "formula",
    "harness",
    "plotdata",
    "product",
    "ranking",
    "supervisor",
    "surveillance",
]
