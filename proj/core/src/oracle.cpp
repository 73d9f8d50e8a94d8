#include "mgtv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

namespace mgtv {

namespace {

template <class S>
int sign(const S &x) {
  return x > 0 ? 1 : (x < 0 ? -1 : 0);
}

// Simultaneous meets: exact for rationals, relative tolerance for doubles.
bool same_time(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}
bool same_time(const Rational &a, const Rational &b) { return a == b; }

template <class S>
void require(bool ok, const std::string &name, const std::string &what) {
  if (!ok)
    throw OracleError(name + ": " + what);
}

}  // namespace

template <class S>
GraphSpec ExplicitSolution<S>::graph_spec() const {
  GraphSpec spec;
  spec.vertices = vertices;
  for (const EdgeDef &e : edges)
    spec.edges.push_back(GraphSpec::EdgeSpec{e.id, e.from, e.to, to_double(e.length)});
  return spec;
}

template <class S>
PiecewiseConstant ExplicitSolution<S>::initial(const MetricGraph &g) const {
  std::vector<EdgePieces> pieces(datum.size());
  for (std::size_t i = 0; i < datum.size(); ++i) {
    for (const S &b : datum[i].breaks)
      pieces[i].breaks.push_back(to_double(b));
    for (const S &v : datum[i].values)
      pieces[i].values.push_back(to_double(v));
  }
  return PiecewiseConstant(g, std::move(pieces));
}

template <class S>
ExplicitSolution<S> plateau_dynamics(
    std::string name, std::vector<std::string> vertices,
    std::vector<typename ExplicitSolution<S>::EdgeDef> edges,
    std::vector<typename ExplicitSolution<S>::Datum> datum) {
  using Datum = typename ExplicitSolution<S>::Datum;
  ExplicitSolution<S> sol;
  sol.name = std::move(name);
  require<S>(edges.size() == datum.size(), sol.name, "one datum per edge");

  // Atoms: the datum pieces. Neighbours: consecutive pieces on an edge, and
  // the end pieces meeting at a vertex.
  struct Atom {
    std::size_t edge;
    S from, to, value;
  };
  std::vector<Atom> atoms;
  std::map<std::string, std::vector<std::size_t>> at_vertex;
  std::vector<std::pair<std::size_t, std::size_t>> cuts;
  S total_length = 0, mass = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Datum &d = datum[i];
    require<S>(edges[i].length > 0, sol.name, "edge lengths must be positive");
    require<S>(d.breaks.size() == d.values.size() + 1 && !d.values.empty() &&
                   d.breaks.front() == 0 && d.breaks.back() == edges[i].length,
               sol.name, "datum must tile every edge");
    total_length += edges[i].length;
    const std::size_t first = atoms.size();
    for (std::size_t k = 0; k < d.values.size(); ++k) {
      require<S>(d.breaks[k] < d.breaks[k + 1], sol.name,
                 "breakpoints must increase");
      atoms.push_back(Atom{i, d.breaks[k], d.breaks[k + 1], d.values[k]});
      mass += (d.breaks[k + 1] - d.breaks[k]) * d.values[k];
      if (k > 0)
        cuts.emplace_back(atoms.size() - 2, atoms.size() - 1);
    }
    at_vertex[edges[i].from].push_back(first);
    at_vertex[edges[i].to].push_back(atoms.size() - 1);
  }
  sol.mean = mass / total_length;

  // Plateaus: connected groups of atoms with equal values.
  std::vector<std::size_t> owner(atoms.size());
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  std::vector<S> value;
  for (const Atom &a : atoms)
    value.push_back(a.value);

  auto relabel = [&](std::vector<std::size_t> parent) {
    auto find = [&](std::size_t x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    std::map<std::size_t, std::size_t> ids;
    std::vector<S> merged_mass, merged_len;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::size_t r = find(owner[i]);
      auto [it, fresh] = ids.emplace(r, ids.size());
      if (fresh) {
        merged_mass.push_back(0);
        merged_len.push_back(0);
      }
      const S len = atoms[i].to - atoms[i].from;
      merged_mass[it->second] += len * value[owner[i]];
      merged_len[it->second] += len;
    }
    std::vector<std::size_t> next(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
      next[i] = ids.at(find(owner[i]));
    owner = std::move(next);
    value.assign(merged_mass.size(), S(0));
    for (std::size_t p = 0; p < value.size(); ++p)
      value[p] = merged_mass[p] / merged_len[p];
  };

  {
    std::vector<std::size_t> parent(atoms.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    auto join = [&](std::size_t a, std::size_t b) {
      if (atoms[a].value == atoms[b].value)
        parent[find(a)] = find(b);
    };
    for (auto [a, b] : cuts)
      join(a, b);
    for (const auto &[v, list] : at_vertex)
      for (std::size_t j = 0; j < list.size(); ++j)
        for (std::size_t k = j + 1; k < list.size(); ++k)
          join(list[j], list[k]);
    relabel(std::move(parent));
  }

  S now = 0;
  for (;;) {
    const std::size_t count = value.size();
    if (count <= 1)
      break;

    std::map<std::pair<std::size_t, std::size_t>, S> weight;
    auto touch = [&](std::size_t p, std::size_t q, const S &w) {
      if (p != q)
        weight[{std::min(p, q), std::max(p, q)}] += w;
    };
    for (auto [a, b] : cuts)
      touch(owner[a], owner[b], S(1));
    for (const auto &[v, list] : at_vertex) {
      if (list.size() < 2)
        continue;
      std::map<std::size_t, int> per;
      for (std::size_t a : list)
        ++per[owner[a]];
      require<S>(per.size() <= 2, sol.name,
                 "three or more plateaus meet at vertex " + v);
      if (per.size() == 2) {
        const auto p = per.begin(), q = std::next(per.begin());
        touch(p->first, q->first, S(std::min(p->second, q->second)));
      }
    }

    OraclePhase<S> phase;
    phase.start = now;
    phase.plateaus.resize(count);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      auto &pl = phase.plateaus[owner[i]];
      pl.segments.push_back(Segment<S>{atoms[i].edge, atoms[i].from, atoms[i].to});
      pl.length += atoms[i].to - atoms[i].from;
    }
    for (std::size_t p = 0; p < count; ++p) {
      phase.plateaus[p].value = value[p];
      phase.plateaus[p].flux = 0;
    }
    for (const auto &[pq, w] : weight) {
      const auto [p, q] = pq;
      const int s = sign<S>(value[q] - value[p]);
      phase.plateaus[p].flux += w * s;
      phase.plateaus[q].flux -= w * s;
    }
    for (auto &pl : phase.plateaus)
      pl.slope = pl.flux / pl.length;

    std::optional<S> dt;
    std::map<std::pair<std::size_t, std::size_t>, S> meet;
    for (const auto &[pq, w] : weight) {
      const auto [p, q] = pq;
      const S gap = value[q] - value[p];
      const S closing = phase.plateaus[p].slope - phase.plateaus[q].slope;
      if (sign<S>(gap) * sign<S>(closing) > 0) {
        const S t = gap / closing;
        meet[pq] = t;
        if (!dt || t < *dt)
          dt = t;
      }
    }
    require<S>(dt.has_value(), sol.name, "no plateaus approach each other");

    now += *dt;
    phase.end = now;
    for (std::size_t p = 0; p < count; ++p)
      value[p] += phase.plateaus[p].slope * *dt;
    std::vector<std::size_t> parent(atoms.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    // Plateau ids double as atom ids here: pick one atom per plateau.
    std::vector<std::size_t> rep(count);
    for (std::size_t i = atoms.size(); i-- > 0;)
      rep[owner[i]] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto &[pq, t] : meet)
      if (same_time(t, *dt))
        parent[find(rep[pq.first])] = find(rep[pq.second]);
    // relabel() expects owner entries to index into parent; use atom reps.
    for (std::size_t i = 0; i < atoms.size(); ++i)
      owner[i] = rep[owner[i]];
    std::vector<S> by_atom(atoms.size());
    for (std::size_t p = 0; p < count; ++p)
      by_atom[rep[p]] = value[p];
    value = std::move(by_atom);
    relabel(std::move(parent));
    sol.phases.push_back(std::move(phase));
  }

  sol.final_value = value.front();
  sol.extinction_time = now;
  sol.vertices = std::move(vertices);
  sol.edges = std::move(edges);
  sol.datum = std::move(datum);
  return sol;
}

namespace {

template <class S>
using EdgeDefs = std::vector<typename ExplicitSolution<S>::EdgeDef>;
template <class S>
using Data = std::vector<typename ExplicitSolution<S>::Datum>;

template <class S>
ExplicitSolution<S> interval(std::string name, const S &L,
                             typename ExplicitSolution<S>::Datum d) {
  return plateau_dynamics<S>(std::move(name), {"v1", "v2"},
                             EdgeDefs<S>{{0, "v1", "v2", L}},
                             Data<S>{std::move(d)});
}

}  // namespace

template <class S>
ExplicitSolution<S> neumann_case1(S L, S a, S k) {
  require<S>(a > 0 && a < L, "neumann1", "requires 0 < a < L");
  require<S>(k >= 0, "neumann1", "requires k >= 0");
  return interval<S>("neumann1", L, {{S(0), a, L}, {k, S(0)}});
}

template <class S>
ExplicitSolution<S> neumann_case2(S L, S b, S k) {
  require<S>(b > 0 && b < L, "neumann2", "requires 0 < b < L");
  require<S>(k >= 0, "neumann2", "requires k >= 0");
  return interval<S>("neumann2", L, {{S(0), b, L}, {S(0), k}});
}

template <class S>
ExplicitSolution<S> neumann_case3(S L, S c, S k1, S k2) {
  require<S>(c > 0 && c < L, "neumann3", "requires 0 < c < L");
  require<S>(k1 <= k2, "neumann3", "requires k1 <= k2");
  return interval<S>("neumann3", L, {{S(0), c, L}, {k1, k2}});
}

template <class S>
ExplicitSolution<S> neumann_case4(S L, S a, S b, S k) {
  require<S>(a > 0 && a < b && b < L, "neumann4", "requires 0 < a < b < L");
  require<S>(L < a + b, "neumann4", "requires L < a + b");
  require<S>(k >= 0, "neumann4", "requires k >= 0");
  return interval<S>("neumann4", L, {{S(0), a, b, L}, {S(0), k, S(0)}});
}

template <class S>
ExplicitSolution<S> path3_example(S l1, S l2, S a, S k) {
  require<S>(l1 > 0 && l2 > 0, "path3", "requires positive lengths");
  require<S>(a > 0 && a < l2, "path3", "requires 0 < a < l2");
  require<S>(l1 > l2 - a, "path3", "requires l1 > l2 - a");
  require<S>(k >= 0, "path3", "requires k >= 0");
  return plateau_dynamics<S>(
      "path3", {"v1", "v2", "v3"},
      EdgeDefs<S>{{0, "v1", "v2", l1}, {1, "v2", "v3", l2}},
      Data<S>{{{S(0), l1}, {S(0)}}, {{S(0), a, l2}, {k, S(0)}}});
}

template <class S>
ExplicitSolution<S> star_example(S l1, S l, S a, S k) {
  require<S>(l1 > 0 && l > 0, "star", "requires positive lengths");
  require<S>(a > 0 && a < l1, "star", "requires 0 < a < l1");
  require<S>(a < 2 * l, "star", "requires a < 2 l");
  require<S>(k >= 0, "star", "requires k >= 0");
  return plateau_dynamics<S>(
      "star", {"v1", "v2", "v3", "v4"},
      EdgeDefs<S>{{0, "v1", "v2", l1}, {1, "v2", "v3", l}, {2, "v2", "v4", l}},
      Data<S>{{{S(0), a, l1}, {S(0), k}},
              {{S(0), l}, {S(0)}},
              {{S(0), l}, {S(0)}}});
}

template <class S>
std::vector<typename ExplicitSolution<S>::Datum>
eval_exact(const ExplicitSolution<S> &sol, const S &t) {
  using Datum = typename ExplicitSolution<S>::Datum;
  if (t < 0)
    throw OracleError("eval: time must be nonnegative");
  std::vector<Datum> out(sol.edges.size());
  if (t == 0)
    return sol.datum;
  if (t >= sol.extinction_time) {
    for (std::size_t i = 0; i < sol.edges.size(); ++i)
      out[i] = Datum{{S(0), sol.edges[i].length}, {sol.final_value}};
    return out;
  }
  const auto phase = std::find_if(sol.phases.begin(), sol.phases.end(),
                                  [&](const OraclePhase<S> &p) { return t < p.end; });
  std::vector<std::vector<std::pair<S, S>>> pieces(sol.edges.size());
  for (const auto &pl : phase->plateaus) {
    const S v = pl.value + pl.slope * (t - phase->start);
    for (const Segment<S> &s : pl.segments)
      pieces[s.edge].emplace_back(s.from, v);
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto &list = pieces[i];
    std::sort(list.begin(), list.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[from, v] : list) {
      out[i].breaks.push_back(from);
      out[i].values.push_back(v);
    }
    out[i].breaks.push_back(sol.edges[i].length);
  }
  return out;
}

template <class S>
PiecewiseConstant eval(const MetricGraph &g, const ExplicitSolution<S> &sol,
                       double t) {
  const auto exact = eval_exact(sol, S(t));
  std::vector<EdgePieces> pieces(exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    for (const S &b : exact[i].breaks)
      pieces[i].breaks.push_back(to_double(b));
    for (const S &v : exact[i].values)
      pieces[i].values.push_back(to_double(v));
  }
  return PiecewiseConstant(g, std::move(pieces));
}

template <class S>
std::vector<S> phase_ends(const ExplicitSolution<S> &sol) {
  std::vector<S> out;
  for (const auto &p : sol.phases)
    out.push_back(p.end);
  return out;
}

#define MGTV_INSTANTIATE(S)                                                    \
  template struct ExplicitSolution<S>;                                         \
  template ExplicitSolution<S> plateau_dynamics<S>(                            \
      std::string, std::vector<std::string>, EdgeDefs<S>, Data<S>);            \
  template ExplicitSolution<S> neumann_case1<S>(S, S, S);                      \
  template ExplicitSolution<S> neumann_case2<S>(S, S, S);                      \
  template ExplicitSolution<S> neumann_case3<S>(S, S, S, S);                   \
  template ExplicitSolution<S> neumann_case4<S>(S, S, S, S);                   \
  template ExplicitSolution<S> path3_example<S>(S, S, S, S);                   \
  template ExplicitSolution<S> star_example<S>(S, S, S, S);                    \
  template std::vector<typename ExplicitSolution<S>::Datum> eval_exact<S>(     \
      const ExplicitSolution<S> &, const S &);                                 \
  template PiecewiseConstant eval<S>(const MetricGraph &,                      \
                                     const ExplicitSolution<S> &, double);     \
  template std::vector<S> phase_ends<S>(const ExplicitSolution<S> &);

MGTV_INSTANTIATE(double)
MGTV_INSTANTIATE(Rational)

#undef MGTV_INSTANTIATE

}  // namespace mgtv
