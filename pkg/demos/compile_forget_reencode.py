"""Compile a CNF to structured DNNF, forget its auxiliary variables, and turn
the circuit back into CNF whose auxiliary variables guess a proof tree.

Run:  python demos/compile_forget_reencode.py
"""
from widthforge.cnf import count_models, has_dependent_aux, is_clausal_encoding, project_models
from widthforge.dnnf import dnnf_function, is_deterministic
from widthforge.gadgets import cardinality_binary
from widthforge.graphs import primal_graph
from widthforge.reencode import dnnf_size_bounds, pipeline_reverse
from widthforge.treewidth import validate_td

g = cardinality_binary(6, 2)
F = g.formula
print(f"source: at most 2 of 6, {F.num_vars} variables ({len(F.aux_vars)} auxiliary), "
      f"{len(F.clauses)} clauses, witness width {g.td.width}")

res = pipeline_reverse(F, g.td)
chain = res.extras["chain"]
print(f"forget chain: {len(chain)} circuits, widths {[getattr(D, 'width', 0) for D in chain]}")
print(f"  all deterministic: {all(bool(is_deterministic(D)) for D in chain)}")

D = res.extras["forgotten"]
G = res.formula
n, k = res.extras["n"], res.extras["k"]
nv, nc, tw = dnnf_size_bounds(n, k)
print(f"re-encoded: {G.num_vars} vars (budget {nv}), {len(G.clauses)} clauses (budget {nc}), "
      f"width {validate_td(primal_graph(G), res.td_witness)} (budget {tw})")
print(f"  encodes the source projection: {bool(is_clausal_encoding(G, project_models(F)))}")
print(f"  dependent auxiliaries: {bool(has_dependent_aux(G))}")
print(f"  model count {count_models(G)} = onset size {dnnf_function(D).count}")
