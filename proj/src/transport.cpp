#include "thinfilm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace thinfilm {

namespace {

void require_compatible(const QuantileDensity& mu, const QuantileDensity& nu, const char* where) {
  if (mu.size() != nu.size())
    throw std::invalid_argument(std::string(where) + ": cell counts differ");
  if (std::abs(mu.mass() - nu.mass()) > 1e-10 * std::max(mu.mass(), nu.mass()))
    throw std::invalid_argument(std::string(where) + ": masses differ");
}

double total_mass(std::span<const Atom> atoms, const char* where) {
  double m = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.x))
      throw std::invalid_argument(std::string(where) + ": invalid atom");
    m += a.mass;
  }
  return m;
}

void require_equal_atom_mass(double ma, double mb, const char* where) {
  if (!(ma > 0.0) || std::abs(ma - mb) > 1e-10 * std::max(ma, mb))
    throw std::invalid_argument(std::string(where) + ": total masses differ");
}

}  // namespace

TransportPlan transport_plan(const QuantileDensity& mu, const QuantileDensity& nu) {
  require_compatible(mu, nu, "transport_plan");
  std::vector<double> map(nu.positions().begin(), nu.positions().end());
  return TransportPlan{mu, nu, std::move(map), w2_sq(mu, nu)};
}

double w2_sq(const QuantileDensity& mu, const QuantileDensity& nu) {
  require_compatible(mu, nu, "w2");
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = mu[i] - nu[i];
    sum += d * d;
  }
  return mu.cell_mass() * sum;
}

double w2(const QuantileDensity& mu, const QuantileDensity& nu) { return std::sqrt(w2_sq(mu, nu)); }

double w2_sq_atoms(std::span<const Atom> mu, std::span<const Atom> nu) {
  const double ma = total_mass(mu, "w2_sq_atoms");
  const double mb = total_mass(nu, "w2_sq_atoms");
  require_equal_atom_mass(ma, mb, "w2_sq_atoms");
  std::vector<Atom> a(mu.begin(), mu.end()), b(nu.begin(), nu.end());
  auto by_x = [](const Atom& l, const Atom& r) { return l.x < r.x; };
  std::sort(a.begin(), a.end(), by_x);
  std::sort(b.begin(), b.end(), by_x);
  // Walk both cumulative distributions; the target masses are rescaled to
  // the source total so the walk ends together.
  const double scale = ma / mb;
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].mass, rb = b.empty() ? 0.0 : b[0].mass * scale;
  double cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    const double d = a[i].x - b[j].x;
    cost += m * d * d;
    ra -= m;
    rb -= m;
    if (ra <= 1e-15 * ma) {
      if (++i < a.size()) ra = a[i].mass;
    }
    if (rb <= 1e-15 * ma) {
      if (++j < b.size()) rb = b[j].mass * scale;
    }
  }
  return cost;
}

double w2_bruteforce(std::span<const Atom> mu, std::span<const Atom> nu) {
  if (mu.size() > kBruteforceMaxAtoms || nu.size() > kBruteforceMaxAtoms)
    throw std::invalid_argument("w2_bruteforce: at most 12 atoms per measure");
  const double ma = total_mass(mu, "w2_bruteforce");
  const double mb = total_mass(nu, "w2_bruteforce");
  require_equal_atom_mass(ma, mb, "w2_bruteforce");

  // Nodes: 0 source, 1..m left atoms, m+1..m+n right atoms, m+n+1 sink.
  const std::size_t m = mu.size(), n = nu.size();
  const std::size_t nodes = m + n + 2, src = 0, snk = m + n + 1;
  struct Edge {
    std::size_t to, rev;
    double cap, cost;
  };
  std::vector<std::vector<Edge>> graph(nodes);
  auto add_edge = [&](std::size_t u, std::size_t v, double cap, double cost) {
    graph[u].push_back({v, graph[v].size(), cap, cost});
    graph[v].push_back({u, graph[u].size() - 1, 0.0, -cost});
  };
  const double scale = ma / mb;
  for (std::size_t i = 0; i < m; ++i) add_edge(src, 1 + i, mu[i].mass, 0.0);
  for (std::size_t j = 0; j < n; ++j) add_edge(1 + m + j, snk, nu[j].mass * scale, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = mu[i].x - nu[j].x;
      add_edge(1 + i, 1 + m + j, std::numeric_limits<double>::infinity(), d * d);
    }

  const double eps = 1e-14 * ma;
  double flow = 0.0, cost = 0.0;
  while (flow < ma - eps) {
    // Bellman-Ford: residual costs may be negative.
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev_node(nodes, nodes), prev_edge(nodes, 0);
    dist[src] = 0.0;
    for (std::size_t round = 0; round + 1 < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (!std::isfinite(dist[u])) continue;
        for (std::size_t k = 0; k < graph[u].size(); ++k) {
          const Edge& e = graph[u][k];
          if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-13 * (1.0 + std::abs(dist[u]))) {
            dist[e.to] = dist[u] + e.cost;
            prev_node[e.to] = u;
            prev_edge[e.to] = k;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!std::isfinite(dist[snk])) break;
    double push = ma - flow;
    for (std::size_t v = snk; v != src; v = prev_node[v])
      push = std::min(push, graph[prev_node[v]][prev_edge[v]].cap);
    for (std::size_t v = snk; v != src; v = prev_node[v]) {
      Edge& e = graph[prev_node[v]][prev_edge[v]];
      e.cap -= push;
      graph[v][e.rev].cap += push;
    }
    flow += push;
    cost += push * dist[snk];
  }
  return cost;
}

QuantileDensity displacement_interpolate(const QuantileDensity& mu, const QuantileDensity& nu,
                                         double t) {
  require_compatible(mu, nu, "displacement_interpolate");
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("displacement_interpolate: t outside [0, 1]");
  if (t == 0.0) return mu;
  if (t == 1.0) return nu;
  std::vector<double> x(mu.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - t) * mu[i] + t * nu[i];
  return QuantileDensity(mu.mass(), std::move(x));
}

QuantileDensity pushforward(const QuantileDensity& mu, const std::function<double(double)>& map) {
  std::vector<double> values(mu.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = map(mu[i]);
  return pushforward(mu, values);
}

QuantileDensity pushforward(const QuantileDensity& mu, std::span<const double> map_values) {
  if (map_values.size() != mu.size())
    throw std::invalid_argument("pushforward: map sampled at the wrong number of points");
  for (std::size_t i = 1; i < map_values.size(); ++i)
    if (!(map_values[i] > map_values[i - 1]))
      throw std::invalid_argument("pushforward: map is not increasing at position " +
                                  std::to_string(i));
  return QuantileDensity(mu.mass(), std::vector<double>(map_values.begin(), map_values.end()));
}

}  // namespace thinfilm
