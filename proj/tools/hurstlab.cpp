// hurstlab: synthesis, estimation, benchmarking, convergence and trace scans
// from the command line. Exit codes: 0 success, 2 usage/validation,
// 3 runtime/numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hurstlab/hurstlab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hurstlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

// Validation failure attributable to a flag.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One manifest per run, written when the object goes out of scope so that
// failure paths produce one as well.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}
  RunManifest(const RunManifest&) = delete;
  RunManifest& operator=(const RunManifest&) = delete;

  ~RunManifest() {
    if (!armed_) return;
    try {
      write();
    } catch (...) {
      std::cerr << "warning: could not write run manifest\n";
    }
  }

  void set(const std::string& key, const std::string& value) { parameters_[key] = value; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_path(std::optional<fs::path> path) { path_ = std::move(path); }
  void arm() { armed_ = true; }
  void finish(int exit_code, std::string error = {}) {
    exit_code_ = exit_code;
    error_ = std::move(error);
  }

 private:
  void write() const {
    json j;
    j["command"] = command_;
    j["parameters"] = parameters_;
    j["base_seed"] = seed_;
    j["toolkit_version"] = std::string(kVersion);
    j["started"] = started_;
    j["finished"] = utc_now();
    j["exit_code"] = exit_code_;
    if (!error_.empty()) j["error"] = error_;
    if (path_) {
      std::ofstream out(*path_);
      out << j.dump(2) << '\n';
    } else {
      std::cerr << j.dump(2) << '\n';
    }
  }

  std::string command_;
  std::string started_;
  std::map<std::string, std::string> parameters_;
  std::uint64_t seed_ = 0;
  std::optional<fs::path> path_;
  int exit_code_ = kExitOk;
  std::string error_;
  bool armed_ = false;
};

std::size_t parse_length_token(std::string token) {
  token = std::string(detail::trim(token));
  if (token.rfind("2^", 0) == 0) {
    const int e = std::stoi(token.substr(2));
    if (e < 0 || e > 40) throw UsageError("--lengths: exponent out of range");
    return std::size_t{1} << e;
  }
  std::size_t pos = 0;
  const auto v = std::stoull(token, &pos);
  if (pos != token.size()) throw UsageError("--lengths: bad value '" + token + "'");
  return v;
}

// "64,128,256", "64..1024" (powers of two) or "2^6..2^16".
std::vector<std::size_t> parse_lengths(const std::string& text) {
  try {
    if (auto dots = text.find(".."); dots != std::string::npos) {
      const std::size_t lo = parse_length_token(text.substr(0, dots));
      const std::size_t hi = parse_length_token(text.substr(dots + 2));
      if (lo == 0 || (lo & (lo - 1)) != 0 || hi < lo) throw UsageError("--lengths: range must start at a power of two");
      std::vector<std::size_t> out;
      for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
      return out;
    }
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(parse_length_token(tok));
    if (out.empty()) throw UsageError("--lengths: empty list");
    return out;
  } catch (const std::logic_error&) {
    throw UsageError("--lengths: cannot parse '" + text + "'");
  }
}

std::vector<double> parse_hursts(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto v = detail::parse_double(tok);
    if (!v) throw UsageError("--hursts: cannot parse '" + tok + "'");
    if (!(*v > 0.0 && *v < 1.0)) throw UsageError("--hursts: hurst must be in (0,1)");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("--hursts: empty list");
  return out;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  if (names.empty()) return {std::begin(kAllMethods), std::end(kAllMethods)};
  for (const auto& n : names) {
    try {
      out.push_back(parse_method(n));
    } catch (const DomainError& e) {
      throw UsageError(std::string("--method: ") + e.what());
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

json estimate_to_json(const HurstEstimate& e) {
  json j;
  j["method"] = std::string(to_string(e.method));
  j["H"] = e.value;
  j["ci_low"] = e.ci_low ? json(*e.ci_low) : json(nullptr);
  j["ci_high"] = e.ci_high ? json(*e.ci_high) : json(nullptr);
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : e.diagnostics) j["diagnostics"][k] = v;
  return j;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("--out: cannot open '" + path.string() + "' for writing");
  return out;
}

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

// Shared flag values.
struct Options {
  double hurst = 0.8;
  std::size_t length = 0;
  double variance = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  std::size_t replicates = 200;
  std::string lengths = "2^6..2^16";
  std::string hursts = "0.5,0.6,0.7,0.8,0.9";
  std::size_t window = 256;
  std::size_t stride = 0;
  double bin_width = 0.01;
  std::string unit = "bytes";
  double low_fraction = 0.10;
  unsigned threads = 0;
  std::string out;
  std::string in;
  std::size_t series_count = 200;
  std::size_t max_length = 65536;
  std::size_t t0 = 64;
  std::size_t step = 200;
};

EstimatorConfig config_from(const Options& o) {
  EstimatorConfig c;
  if (!(o.low_fraction > 0.0 && o.low_fraction <= 1.0)) throw UsageError("--low-fraction: must be in (0,1]");
  c.pgram_low_fraction = o.low_fraction;
  return c;
}

TimeSeries read_series_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--in: cannot read '" + path.string() + "'");
  try {
    return read_series_csv(in);
  } catch (const Error& e) {
    throw UsageError("--in: " + path.string() + ": " + e.what());
  }
}

int run_synth(const Options& o, RunManifest& manifest) {
  manifest.set("hurst", detail::format_double(o.hurst));
  manifest.set("length", std::to_string(o.length));
  manifest.set("variance", detail::format_double(o.variance));
  manifest.set("out", o.out);
  manifest.set_seed(o.seed);
  if (!o.out.empty()) manifest.set_path(sidecar(o.out));
  manifest.arm();

  if (!(o.hurst > 0.0 && o.hurst < 1.0)) throw UsageError("--hurst: hurst must be in (0,1)");
  if (o.length < 2) throw UsageError("--length: length must be at least 2");
  if (!(o.variance > 0.0)) throw UsageError("--variance: variance must be positive");

  const auto series = synthesize_fgn({o.hurst, o.variance, o.length, o.seed});
  if (o.out.empty()) {
    write_series_csv(std::cout, series);
  } else {
    auto out = open_output(o.out);
    write_series_csv(out, series);
  }
  return kExitOk;
}

int run_estimate(const Options& o, RunManifest& manifest) {
  manifest.set("in", o.in);
  manifest.set("method", join(o.methods));
  manifest.set("low_fraction", detail::format_double(o.low_fraction));
  if (!o.out.empty()) manifest.set_path(sidecar(o.out));
  manifest.arm();

  const auto methods = parse_methods(o.methods);
  const auto config = config_from(o);
  const auto series = read_series_file(o.in);
  if (series.size() < 64) throw UsageError("--in: series has " + std::to_string(series.size()) + " points, need at least 64");

  json report = json::array();
  for (Method m : methods) report.push_back(estimate_to_json(estimate(m, series, config)));
  if (o.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    auto out = open_output(o.out);
    out << report.dump(2) << '\n';
  }
  return kExitOk;
}

int run_bench(const Options& o, RunManifest& manifest) {
  manifest.set("hursts", o.hursts);
  manifest.set("lengths", o.lengths);
  manifest.set("replicates", std::to_string(o.replicates));
  manifest.set("method", join(o.methods));
  manifest.set("low_fraction", detail::format_double(o.low_fraction));
  manifest.set("threads", std::to_string(o.threads));
  manifest.set("out", o.out);
  manifest.set_seed(o.seed);
  if (o.out.empty()) throw UsageError("--out: bench needs an output directory");
  fs::create_directories(o.out);
  manifest.set_path(fs::path(o.out) / "manifest.json");
  manifest.arm();

  ExperimentGrid grid;
  grid.hursts = parse_hursts(o.hursts);
  grid.lengths = parse_lengths(o.lengths);
  grid.replicates = o.replicates;
  grid.methods = parse_methods(o.methods);
  grid.base_seed = o.seed;
  try {
    grid.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("grid: ") + e.what());
  }
  const auto config = config_from(o);

  const auto result = run_grid(grid, config, o.threads);
  {
    auto out = open_output(fs::path(o.out) / "summary.csv");
    write_summary_csv(out, result.summaries);
  }
  {
    auto out = open_output(fs::path(o.out) / "replicates.csv");
    write_replicates_csv(out, result.records);
  }

  std::cout << "method,H0,N_min\n";
  for (Method m : grid.methods) {
    for (double h : grid.hursts) {
      std::cout << to_string(m) << ',' << detail::format_double(h) << ',';
      try {
        if (const auto n = find_nmin(result.summaries, m, h)) {
          std::cout << *n;
        } else {
          std::cout << "none";
        }
      } catch (const DomainError&) {
        std::cout << "n/a";  // lengths are not a contiguous power-of-two range
      }
      std::cout << '\n';
    }
  }
  if (result.any_flagged()) {
    std::cerr << "error: at least one cell exceeded the 10% replicate failure threshold\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run_converge(const Options& o, RunManifest& manifest) {
  manifest.set("method", join(o.methods));
  manifest.set("hurst", detail::format_double(o.hurst));
  manifest.set("series_count", std::to_string(o.series_count));
  manifest.set("max_length", std::to_string(o.max_length));
  manifest.set("t0", std::to_string(o.t0));
  manifest.set("step", std::to_string(o.step));
  manifest.set("threads", std::to_string(o.threads));
  manifest.set("out", o.out);
  manifest.set_seed(o.seed);
  if (!o.out.empty()) manifest.set_path(sidecar(o.out));
  manifest.arm();

  const auto methods = parse_methods(o.methods);
  if (o.methods.size() != 1) throw UsageError("--method: converge takes exactly one method");
  if (!(o.hurst > 0.0 && o.hurst < 1.0)) throw UsageError("--hurst: hurst must be in (0,1)");
  if (o.t0 < 64) throw UsageError("--t0: must be at least 64");
  if (o.max_length < o.t0) throw UsageError("--max-length: must be at least --t0");
  if (o.step == 0) throw UsageError("--step: must be positive");
  if (o.series_count == 0) throw UsageError("--series-count: must be positive");

  ConvergenceOptions opt;
  opt.method = methods.front();
  opt.hurst = o.hurst;
  opt.series_count = o.series_count;
  opt.max_length = o.max_length;
  opt.t0 = o.t0;
  opt.step = o.step;
  opt.base_seed = o.seed;
  opt.threads = o.threads;
  const auto curve = mean_convergence_curve(opt, config_from(o));
  if (o.out.empty()) {
    write_convergence_csv(std::cout, curve);
  } else {
    auto out = open_output(o.out);
    write_convergence_csv(out, curve);
  }
  return kExitOk;
}

int run_scan(const Options& o, RunManifest& manifest) {
  const std::size_t stride = o.stride == 0 ? o.window / 2 : o.stride;
  manifest.set("in", o.in);
  manifest.set("window", std::to_string(o.window));
  manifest.set("stride", std::to_string(stride));
  manifest.set("method", join(o.methods));
  manifest.set("bin_width", detail::format_double(o.bin_width));
  manifest.set("unit", o.unit);
  manifest.set("threads", std::to_string(o.threads));
  manifest.set("out", o.out);
  if (!o.out.empty()) manifest.set_path(sidecar(o.out));
  manifest.arm();

  const auto methods = parse_methods(o.methods.empty() ? std::vector<std::string>{"whittle"} : o.methods);
  if (methods.size() != 1) throw UsageError("--method: scan takes exactly one method");
  if (o.window < 2) throw UsageError("--window: must be at least 2");
  if (stride == 0 || stride >= o.window)
    throw UsageError("--stride: stride must be smaller than --window (consecutive windows must overlap)");
  if (!(o.bin_width > 0.0)) throw UsageError("--bin-width: must be positive");
  Unit unit;
  try {
    unit = parse_unit(o.unit);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--unit: ") + e.what());
  }
  const auto config = config_from(o);

  std::ifstream in(o.in);
  if (!in) throw UsageError("--in: cannot read '" + o.in + "'");
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);

  std::vector<double> values;
  double origin = 0.0;
  double width = 1.0;
  try {
    if (detail::trim(first) == kCaptureHeader) {
      const auto records = parse_capture_csv(in);
      auto binned = bin_to_series(records, o.bin_width, unit);
      values = std::move(binned.values);
      origin = binned.origin;
      width = binned.bin_width;
    } else {
      values = read_series_csv(in).data();
    }
  } catch (const Error& e) {
    throw UsageError("--in: " + o.in + ": " + e.what());
  }
  if (o.window > values.size())
    throw UsageError("--window: window " + std::to_string(o.window) + " exceeds series length " +
                     std::to_string(values.size()));

  const auto scan = sliding_window_scan(values, o.window, stride, methods.front(), config, o.threads);
  if (o.out.empty()) {
    write_scan_csv(std::cout, scan, origin, width);
  } else {
    auto out = open_output(o.out);
    write_scan_csv(out, scan, origin, width);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hurst exponent toolkit: fGn synthesis, estimation, benchmarking and trace scans"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  auto seed_flag = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Base seed")->envname("HURSTLAB_SEED");
  };
  auto thread_flag = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  };

  auto* synth = app.add_subcommand("synth", "Synthesize exact fractional Gaussian noise");
  synth->add_option("--hurst", o.hurst, "Hurst exponent in (0,1)")->required();
  synth->add_option("--length", o.length, "Number of samples")->required();
  synth->add_option("--variance", o.variance, "Marginal variance");
  seed_flag(synth);
  synth->add_option("--out", o.out, "Output CSV (default: stdout)");

  auto* est = app.add_subcommand("estimate", "Estimate H of a series CSV; JSON report on stdout");
  est->add_option("--in,input", o.in, "Series CSV")->required();
  est->add_option("--method", o.methods, "whittle, abry-veitch, periodogram, rs (repeatable; default all)");
  est->add_option("--low-fraction", o.low_fraction, "Periodogram low-frequency fraction");
  est->add_option("--out", o.out, "Write the JSON report here instead of stdout");

  auto* bench = app.add_subcommand("bench", "Monte-Carlo grid of bias, std and MSE");
  bench->add_option("--hursts", o.hursts, "Comma list of H values");
  bench->add_option("--lengths", o.lengths, "Comma list, or a power-of-two range like 2^6..2^16");
  bench->add_option("--replicates", o.replicates, "Series per (H, N) cell");
  bench->add_option("--method", o.methods, "Methods (repeatable; default all)");
  bench->add_option("--low-fraction", o.low_fraction, "Periodogram low-frequency fraction");
  seed_flag(bench);
  thread_flag(bench);
  bench->add_option("--out", o.out, "Output directory")->required();

  auto* conv = app.add_subcommand("converge", "Mean estimate along growing prefixes");
  conv->add_option("--method", o.methods, "Estimator")->required();
  conv->add_option("--hurst", o.hurst, "Nominal H");
  conv->add_option("--series-count", o.series_count, "Number of synthetic series");
  conv->add_option("--max-length", o.max_length, "Series length M");
  conv->add_option("--t0", o.t0, "First prefix length");
  conv->add_option("--step", o.step, "Prefix increment");
  conv->add_option("--low-fraction", o.low_fraction, "Periodogram low-frequency fraction");
  seed_flag(conv);
  thread_flag(conv);
  conv->add_option("--out", o.out, "Output CSV (default: stdout)");

  auto* scan = app.add_subcommand("scan", "Sliding-window H over a series or capture CSV");
  scan->add_option("--in,input", o.in, "Series CSV or capture CSV (timestamp,bytes)")->required();
  scan->add_option("--window", o.window, "Window length in samples");
  scan->add_option("--stride", o.stride, "Window stride (default window/2)");
  scan->add_option("--method", o.methods, "Estimator (default whittle)");
  scan->add_option("--bin-width", o.bin_width, "Capture bin width in seconds");
  scan->add_option("--unit", o.unit, "Capture bin unit: bytes or frames");
  scan->add_option("--low-fraction", o.low_fraction, "Periodogram low-frequency fraction");
  thread_flag(scan);
  scan->add_option("--out", o.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  RunManifest manifest(chosen->get_name());
  int code = kExitOk;
  try {
    if (chosen == synth) code = run_synth(o, manifest);
    else if (chosen == est) code = run_estimate(o, manifest);
    else if (chosen == bench) code = run_bench(o, manifest);
    else if (chosen == conv) code = run_converge(o, manifest);
    else code = run_scan(o, manifest);
    manifest.finish(code);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    manifest.finish(kExitUsage, e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    manifest.finish(kExitRuntime, e.what());
    return kExitRuntime;
  }
  return code;
}
