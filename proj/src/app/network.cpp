#include "sparsevar/app/network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/errors.hpp"

namespace sparsevar::app {

int Network::influence(const std::string& category) const {
  return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.source == category; }));
}

int Network::responsiveness(const std::string& category) const {
  return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.target == category; }));
}

bool group_active(const FitResult& fit, int response, int predictor) {
  for (const auto& lag : fit.coefficients.lags)
    if (lag(response, predictor) != 0.0) return true;
  return false;
}

namespace {

struct Layout {
  std::vector<std::string> categories;
  // Column of category c's sales and of its `channel` variable (-1 if absent).
  std::vector<int> sales;
  std::vector<int> predictor;
};

Layout layout(const std::vector<FitResult>& fits, Channel channel) {
  if (fits.empty()) throw DataError("network extraction needs at least one fit");
  const auto& names = fits.front().names;
  for (const auto& fit : fits) {
    if (fit.names != names) throw DataError("fits do not share the same series names");
    if (fit.coefficients.q() != static_cast<int>(names.size()))
      throw DataError("fit dimension does not match its series names");
  }
  Layout out;
  for (const auto& name : names) {
    const VariableName v = parse_variable(name);
    if (v.channel == Channel::sales) out.categories.push_back(v.category);
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  };
  for (const auto& c : out.categories) {
    out.sales.push_back(column(variable_name(c, Channel::sales)));
    out.predictor.push_back(column(variable_name(c, channel)));
  }
  return out;
}

}  // namespace

Network extract_network(const std::vector<FitResult>& fits, Channel channel) {
  const Layout lay = layout(fits, channel);
  Network net;
  net.channel = channel;
  net.stores = static_cast<int>(fits.size());
  net.categories = lay.categories;
  const std::size_t n = lay.categories.size();
  for (std::size_t a = 0; a < n; ++a) {
    if (lay.predictor[a] < 0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      int support = 0;
      for (const auto& fit : fits) support += group_active(fit, lay.sales[b], lay.predictor[a]) ? 1 : 0;
      Edge e{lay.categories[a], lay.categories[b], channel, support, net.stores};
      if (a == b)
        net.within.push_back(e);
      else if (2 * support > net.stores)
        net.edges.push_back(e);
    }
  }
  return net;
}

Prevalence prevalence(const std::vector<FitResult>& fits, Channel channel) {
  const Layout lay = layout(fits, channel);
  Prevalence out;
  out.channel = channel;
  int within = 0, within_total = 0, cross = 0, cross_total = 0;
  for (const auto& fit : fits) {
    for (std::size_t a = 0; a < lay.categories.size(); ++a) {
      if (lay.predictor[a] < 0) continue;
      for (std::size_t b = 0; b < lay.categories.size(); ++b) {
        const int active = group_active(fit, lay.sales[b], lay.predictor[a]) ? 1 : 0;
        if (a == b) {
          within += active;
          ++within_total;
        } else {
          cross += active;
          ++cross_total;
        }
      }
    }
  }
  out.within = within_total ? static_cast<double>(within) / within_total : 0.0;
  out.cross = cross_total ? static_cast<double>(cross) / cross_total : 0.0;
  return out;
}

DegreeConcordance degree_concordance(const std::vector<FitResult>& fits, Channel channel) {
  const Layout lay = layout(fits, channel);
  const std::size_t n = lay.categories.size();
  std::vector<std::vector<double>> out_degree, in_degree;
  for (const auto& fit : fits) {
    std::vector<double> outs(n, 0.0), ins(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      if (lay.predictor[a] < 0) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || !group_active(fit, lay.sales[b], lay.predictor[a])) continue;
        outs[a] += 1.0;
        ins[b] += 1.0;
      }
    }
    out_degree.push_back(std::move(outs));
    in_degree.push_back(std::move(ins));
  }
  DegreeConcordance result;
  result.channel = channel;
  result.influence = eval::kendall_w(out_degree);
  result.responsiveness = eval::kendall_w(in_degree);
  return result;
}

void write_edges_csv(std::ostream& out, const std::vector<Network>& networks) {
  out << "source,target,channel,support,stores,kind\n";
  for (const auto& net : networks) {
    for (const auto& e : net.edges)
      out << fmt::format("{},{},{},{},{},cross\n", e.source, e.target, channel_name(e.channel), e.support, e.stores);
    for (const auto& e : net.within)
      out << fmt::format("{},{},{},{},{},within\n", e.source, e.target, channel_name(e.channel), e.support, e.stores);
  }
}

void write_degrees_csv(std::ostream& out, const std::vector<Network>& networks) {
  out << "channel,category,influence,responsiveness\n";
  for (const auto& net : networks)
    for (const auto& c : net.categories)
      out << fmt::format("{},{},{},{}\n", channel_name(net.channel), c, net.influence(c), net.responsiveness(c));
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_graphml(std::ostream& out, const std::vector<Network>& networks) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"channel\" for=\"edge\" attr.name=\"channel\" attr.type=\"string\"/>\n"
         "  <key id=\"support\" for=\"edge\" attr.name=\"support\" attr.type=\"int\"/>\n"
         "  <key id=\"stores\" for=\"edge\" attr.name=\"stores\" attr.type=\"int\"/>\n"
         "  <graph id=\"categories\" edgedefault=\"directed\">\n";
  std::vector<std::string> nodes;
  for (const auto& net : networks)
    for (const auto& c : net.categories)
      if (std::find(nodes.begin(), nodes.end(), c) == nodes.end()) nodes.push_back(c);
  for (const auto& c : nodes) out << "    <node id=\"" << xml_escape(c) << "\"/>\n";
  int id = 0;
  for (const auto& net : networks) {
    for (const auto& e : net.edges) {
      out << fmt::format("    <edge id=\"e{}\" source=\"{}\" target=\"{}\">\n", id++, xml_escape(e.source),
                         xml_escape(e.target))
          << fmt::format("      <data key=\"channel\">{}</data>\n", channel_name(e.channel))
          << fmt::format("      <data key=\"support\">{}</data>\n", e.support)
          << fmt::format("      <data key=\"stores\">{}</data>\n", e.stores) << "    </edge>\n";
    }
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const std::vector<Network>& networks) {
  out << "digraph categories {\n";
  std::vector<std::string> nodes;
  for (const auto& net : networks)
    for (const auto& c : net.categories)
      if (std::find(nodes.begin(), nodes.end(), c) == nodes.end()) nodes.push_back(c);
  for (const auto& c : nodes) out << "  " << dot_quote(c) << ";\n";
  for (const auto& net : networks) {
    for (const auto& e : net.edges) {
      out << fmt::format("  {} -> {} [channel={}, support={}, stores={}, label=\"{} {}/{}\"];\n", dot_quote(e.source),
                         dot_quote(e.target), channel_name(e.channel), e.support, e.stores, channel_name(e.channel),
                         e.support, e.stores);
    }
  }
  out << "}\n";
}

}  // namespace sparsevar::app
