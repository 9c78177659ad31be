#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "sfcdelay/netsim.hpp"

namespace sfcdelay::netsim {

namespace {

constexpr double kProbabilitySumTolerance = 1e-9;
constexpr double kNormalizationTolerance = 0.02;

[[noreturn]] void invalid(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

double ServiceModel::sample(Rng& rng) const {
  if (family == ServiceFamily::Exponential) {
    return std::exponential_distribution<double>(1.0 / mean)(rng);
  }
  return std::gamma_distribution<double>(1.0 / scv, mean * scv)(rng);
}

RoutingDag::RoutingDag(int node_count, std::vector<RoutingEdge> edges, int source)
    : node_count_(node_count), source_(source), edges_(std::move(edges)) {
  if (node_count_ < 1) invalid("routing: at least one node required");
  if (source_ < 0 || source_ >= node_count_) invalid("routing: source out of range");
  for (const auto& e : edges_) {
    if (e.from < 0 || e.from >= node_count_ || e.to < 0 || e.to >= node_count_) {
      invalid("routing: edge endpoint out of range");
    }
    if (!(e.probability > 0.0 && e.probability <= 1.0)) {
      invalid("routing: edge probability " + std::to_string(e.probability) + " outside (0,1]");
    }
  }
  std::stable_sort(edges_.begin(), edges_.end(),
                   [](const RoutingEdge& a, const RoutingEdge& b) { return a.from < b.from; });
  first_edge_.assign(node_count_ + 1, 0);
  for (const auto& e : edges_) ++first_edge_[e.from + 1];
  std::partial_sum(first_edge_.begin(), first_edge_.end(), first_edge_.begin());

  for (int n = 0; n < node_count_; ++n) {
    auto out = successors(n);
    if (out.empty()) {
      sinks_.push_back(n);
      continue;
    }
    double total = 0.0;
    for (const auto& e : out) total += e.probability;
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      invalid("routing: outgoing probabilities of node " + std::to_string(n) + " sum to " +
              std::to_string(total));
    }
  }

  // Kahn's algorithm for acyclicity.
  std::vector<int> indegree(node_count_, 0);
  for (const auto& e : edges_) ++indegree[e.to];
  std::vector<int> ready;
  for (int n = 0; n < node_count_; ++n) {
    if (indegree[n] == 0) ready.push_back(n);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int n = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& e : successors(n)) {
      if (--indegree[e.to] == 0) ready.push_back(e.to);
    }
  }
  if (visited != node_count_) invalid("routing: graph contains a cycle");

  std::vector<bool> reached(node_count_, false);
  std::vector<int> stack{source_};
  reached[source_] = true;
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    for (const auto& e : successors(n)) {
      if (!reached[e.to]) {
        reached[e.to] = true;
        stack.push_back(e.to);
      }
    }
  }
  for (int n = 0; n < node_count_; ++n) {
    if (!reached[n]) invalid("routing: node " + std::to_string(n) + " unreachable from source");
  }

  Path current;
  std::function<void(int)> walk = [&](int n) {
    current.stages.push_back(n);
    auto out = successors(n);
    if (out.empty()) {
      paths_.push_back(current);
    } else {
      for (const auto& e : out) {
        current.edge_probabilities.push_back(e.probability);
        const double saved = current.probability;
        current.probability *= e.probability;
        walk(e.to);
        current.probability = saved;
        current.edge_probabilities.pop_back();
      }
    }
    current.stages.pop_back();
  };
  walk(source_);
}

RoutingDag RoutingDag::chain(int node_count) {
  std::vector<RoutingEdge> edges;
  for (int n = 0; n + 1 < node_count; ++n) edges.push_back({n, n + 1, 1.0});
  return RoutingDag(node_count, std::move(edges), 0);
}

std::span<const RoutingEdge> RoutingDag::successors(int node) const {
  return std::span<const RoutingEdge>(edges_).subspan(first_edge_[node],
                                                      first_edge_[node + 1] - first_edge_[node]);
}

bool RoutingDag::is_sink(int node) const { return first_edge_[node] == first_edge_[node + 1]; }

int RoutingDag::path_id(std::span<const int> stages) const {
  for (std::size_t k = 0; k < paths_.size(); ++k) {
    if (std::ranges::equal(paths_[k].stages, stages)) return static_cast<int>(k);
  }
  return -1;
}

double Nhpp::rate_at(double t) const {
  return mean_rate * (1.0 + amplitude * std::sin(2.0 * M_PI * t / period));
}

double mean_arrival_rate(const ArrivalModel& model) {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaRenewal>) {
          return m.rate;
        } else {
          return m.mean_rate;
        }
      },
      model);
}

std::string describe(const ArrivalModel& model) {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaRenewal>) {
          os << "gamma renewal (rate " << m.rate << ", scv " << m.scv << ")";
        } else if constexpr (std::is_same_v<T, Nhpp>) {
          os << "nhpp (mean rate " << m.mean_rate << ", amplitude " << m.amplitude << ", period "
             << m.period << ")";
        } else {
          os << "mmpp (mean rate " << m.mean_rate << ", p_on_off " << m.p_on_to_off
             << ", p_off_on " << m.p_off_to_on << ")";
        }
      },
      model);
  return os.str();
}

std::vector<std::string> NetworkSpec::validate() const {
  if (stages.empty()) invalid("network: stages must be nonempty");
  if (static_cast<int>(stages.size()) != routing.node_count()) {
    invalid("network: " + std::to_string(stages.size()) + " stages but routing has " +
            std::to_string(routing.node_count()) + " nodes");
  }
  for (std::size_t n = 0; n < stages.size(); ++n) {
    const auto& s = stages[n];
    const std::string where = "stage " + std::to_string(n) + ": ";
    if (s.servers < 1) invalid(where + "servers must be >= 1");
    if (!(s.service.mean > 0.0) || !std::isfinite(s.service.mean)) {
      invalid(where + "service mean must be > 0");
    }
    if (!(s.service.scv > 0.0) || !std::isfinite(s.service.scv)) {
      invalid(where + "service scv must be > 0");
    }
    if (s.service.family == ServiceFamily::Exponential && s.service.scv != 1.0) {
      invalid(where + "exponential service requires scv = 1");
    }
  }
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaRenewal>) {
          if (!(m.rate > 0.0)) invalid("arrivals: rate must be > 0");
          if (!(m.scv > 0.0)) invalid("arrivals: scv must be > 0");
        } else if constexpr (std::is_same_v<T, Nhpp>) {
          if (!(m.mean_rate > 0.0)) invalid("arrivals: mean rate must be > 0");
          if (!(m.amplitude >= 0.0 && m.amplitude < 1.0)) {
            invalid("arrivals: nhpp amplitude must lie in [0,1)");
          }
          if (!(m.period > 0.0)) invalid("arrivals: nhpp period must be > 0");
        } else {
          if (!(m.mean_rate > 0.0)) invalid("arrivals: mean rate must be > 0");
          if (!(m.p_on_to_off > 0.0 && m.p_on_to_off < 1.0) ||
              !(m.p_off_to_on > 0.0 && m.p_off_to_on < 1.0)) {
            invalid("arrivals: mmpp transition probabilities must lie in (0,1)");
          }
        }
      },
      arrivals);

  std::vector<std::string> warnings;
  const double ingress = stages[routing.source()].capacity();
  if (std::abs(ingress - 1.0) > kNormalizationTolerance) {
    warnings.push_back("ingress capacity c*mu = " + std::to_string(ingress) +
                       " (time is expected to be normalized so that it equals 1)");
  }
  return warnings;
}

// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() { return {"tandem1", "tandem2", "acyclic1", "acyclic2"}; }

namespace {

std::vector<StageSpec> gamma_stages(std::initializer_list<int> servers,
                                    std::initializer_list<double> rates) {
  constexpr double kServiceScv = 0.8;
  std::vector<StageSpec> out;
  auto r = rates.begin();
  for (int c : servers) {
    out.push_back({c, {ServiceFamily::Gamma, 1.0 / *r++, kServiceScv}});
  }
  return out;
}

constexpr double kMeanRate = 0.95;

}  // namespace

NetworkSpec build_topology(const std::string& name_or_path, double acyclic1_branch) {
  NetworkSpec spec;
  spec.name = name_or_path;
  if (name_or_path == "tandem1") {
    spec.stages = gamma_stages({5, 3, 2}, {0.2, 1.0 / 3.0, 0.5});
    spec.routing = RoutingDag::chain(3);
    spec.arrivals = GammaRenewal{kMeanRate, 0.7};
  } else if (name_or_path == "tandem2") {
    const double r = 1.0 / 3.0;
    spec.stages = gamma_stages({3, 3, 5, 5, 4, 4}, {r, r, r, r, r, r});
    spec.routing = RoutingDag::chain(6);
    spec.arrivals = Nhpp{kMeanRate, 0.5, 144.0};
  } else if (name_or_path == "acyclic1") {
    spec.stages = gamma_stages({5, 3, 3, 2}, {0.2, 2.0 / 9.0, 1.0 / 9.0, 0.5});
    const double p = acyclic1_branch;
    spec.routing = RoutingDag(4, {{0, 1, p}, {0, 2, 1.0 - p}, {1, 3, 1.0}, {2, 3, 1.0}});
    spec.arrivals = GammaRenewal{kMeanRate, 0.7};
  } else if (name_or_path == "acyclic2") {
    spec.stages = gamma_stages({1, 1, 1, 1, 1}, {1.0, 4.0 / 9.0, 1.0 / 3.0, 2.0 / 9.0, 1.0});
    spec.routing = RoutingDag(5, {{0, 1, 4.0 / 9.0},
                                  {0, 2, 1.0 / 3.0},
                                  {0, 3, 2.0 / 9.0},
                                  {1, 4, 1.0},
                                  {2, 4, 1.0},
                                  {3, 4, 1.0}});
    spec.arrivals = Mmpp{kMeanRate, 0.4, 0.1};
  } else if (std::filesystem::exists(name_or_path)) {
    return load_network_config(name_or_path);
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown topology '" + name_or_path + "' (presets: " + valid +
                                ", or a config file path)");
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// YAML config
//
//   name: my-chain
//   stages:
//     - {servers: 5, service: {family: gamma, rate: 0.2, scv: 0.8}}
//     - {servers: 3, service: {family: exponential, mean: 3}}
//   routing:                  # optional; omitted means a tandem chain
//     source: 0
//     edges: [[0, 1, 1.0]]
//   arrivals: {type: gamma, rate: 0.95, scv: 0.7}
//             {type: nhpp, mean_rate: 0.95, amplitude: 0.5, period: 144}
//             {type: mmpp, mean_rate: 0.95, p_on_to_off: 0.4, p_off_to_on: 0.1}

namespace {

ServiceModel parse_service(const YAML::Node& node, std::size_t stage) {
  ServiceModel s;
  const auto family = node["family"] ? node["family"].as<std::string>() : "exponential";
  if (family == "gamma") {
    s.family = ServiceFamily::Gamma;
  } else if (family == "exponential") {
    s.family = ServiceFamily::Exponential;
  } else {
    invalid("stage " + std::to_string(stage) + ": unknown service family '" + family + "'");
  }
  if (node["mean"]) {
    s.mean = node["mean"].as<double>();
  } else if (node["rate"]) {
    s.mean = 1.0 / node["rate"].as<double>();
  } else {
    invalid("stage " + std::to_string(stage) + ": service needs 'mean' or 'rate'");
  }
  s.scv = node["scv"] ? node["scv"].as<double>() : 1.0;
  return s;
}

ArrivalModel parse_arrivals(const YAML::Node& node) {
  if (!node) invalid("config: missing 'arrivals'");
  const auto type = node["type"].as<std::string>("");
  if (type == "gamma" || type == "poisson") {
    return GammaRenewal{node["rate"].as<double>(), node["scv"].as<double>(1.0)};
  }
  if (type == "nhpp") {
    return Nhpp{node["mean_rate"].as<double>(), node["amplitude"].as<double>(),
                node["period"].as<double>()};
  }
  if (type == "mmpp") {
    return Mmpp{node["mean_rate"].as<double>(), node["p_on_to_off"].as<double>(),
                node["p_off_to_on"].as<double>()};
  }
  invalid("config: unknown arrival type '" + type + "'");
}

}  // namespace

NetworkSpec parse_network_config(const std::string& yaml_text) {
  NetworkSpec spec;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    spec.name = root["name"].as<std::string>("custom");
    const auto stages = root["stages"];
    if (!stages || !stages.IsSequence()) invalid("config: 'stages' must be a list");
    for (std::size_t n = 0; n < stages.size(); ++n) {
      StageSpec s;
      s.servers = stages[n]["servers"].as<int>(1);
      if (!stages[n]["service"]) invalid("stage " + std::to_string(n) + ": missing 'service'");
      s.service = parse_service(stages[n]["service"], n);
      spec.stages.push_back(s);
    }
    const int count = static_cast<int>(spec.stages.size());
    if (const auto routing = root["routing"]) {
      std::vector<RoutingEdge> edges;
      for (const auto& e : routing["edges"]) {
        edges.push_back({e[0].as<int>(), e[1].as<int>(), e[2].as<double>()});
      }
      spec.routing = RoutingDag(count, std::move(edges), routing["source"].as<int>(0));
    } else {
      spec.routing = RoutingDag::chain(count);
    }
    spec.arrivals = parse_arrivals(root["arrivals"]);
  } catch (const YAML::Exception& e) {
    invalid(std::string("config: ") + e.what());
  }
  spec.validate();
  return spec;
}

NetworkSpec load_network_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open network config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network_config(ss.str());
}

std::string to_config_yaml(const NetworkSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << spec.name;
  out << YAML::Key << "stages" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : spec.stages) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "servers" << YAML::Value << s.servers;
    out << YAML::Key << "service" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "family" << YAML::Value
        << (s.service.family == ServiceFamily::Gamma ? "gamma" : "exponential");
    out << YAML::Key << "mean" << YAML::Value << s.service.mean;
    out << YAML::Key << "scv" << YAML::Value << s.service.scv;
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value << spec.routing.source();
  out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : spec.routing.edges()) {
    out << YAML::Flow << YAML::BeginSeq << e.from << e.to << e.probability << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::Key << "arrivals" << YAML::Value << YAML::Flow << YAML::BeginMap;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaRenewal>) {
          out << YAML::Key << "type" << YAML::Value << "gamma";
          out << YAML::Key << "rate" << YAML::Value << m.rate;
          out << YAML::Key << "scv" << YAML::Value << m.scv;
        } else if constexpr (std::is_same_v<T, Nhpp>) {
          out << YAML::Key << "type" << YAML::Value << "nhpp";
          out << YAML::Key << "mean_rate" << YAML::Value << m.mean_rate;
          out << YAML::Key << "amplitude" << YAML::Value << m.amplitude;
          out << YAML::Key << "period" << YAML::Value << m.period;
        } else {
          out << YAML::Key << "type" << YAML::Value << "mmpp";
          out << YAML::Key << "mean_rate" << YAML::Value << m.mean_rate;
          out << YAML::Key << "p_on_to_off" << YAML::Value << m.p_on_to_off;
          out << YAML::Key << "p_off_to_on" << YAML::Value << m.p_off_to_on;
        }
      },
      spec.arrivals);
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace sfcdelay::netsim
