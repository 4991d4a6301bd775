#include "qttn/search/search.hpp"

#include <istream>
#include <ostream>

#include "qttn/symmetry/z2_io.hpp"
#include "qttn/tensor/binary_io.hpp"

namespace qttn {

PrecisionSchedule::PrecisionSchedule(std::string pattern) : pattern_(std::move(pattern)) {
  if (pattern_.empty()) throw ArgumentError("precision schedule must not be empty");
  for (char c : pattern_)
    if (c != 'S' && c != 'C' && c != 'D' && c != 'Z')
      throw ArgumentError(std::string("precision schedule contains invalid character '") + c + "'");
}

std::size_t TilingPolicy::tile_entries(Precision p) const {
  if (!enabled) return 0;
  validate();
  return tile_bytes / bytes_per_scalar(p);
}

void TilingPolicy::validate() const {
  if (tile_bytes == 0 || tile_bytes % 16 != 0) throw ArgumentError("tile_bytes must be a positive multiple of 16");
}

void SweepConfig::validate() const {
  if (chi < 2) throw ArgumentError("chi must be >= 2");
  if (!(lanczos.tol > 0.0) || lanczos.max_iter < 1) throw ArgumentError("Lanczos settings must be positive");
  if (!(svd_cutoff > 0.0)) throw ArgumentError("svd_cutoff must be > 0");
  if (backend.thread_count < 1) throw ArgumentError("thread count must be >= 1");
  tiling.validate();
}

Precision precision_of(const AnyState& s) {
  return std::visit([](const auto& st) { return std::decay_t<decltype(st)>::precision(); }, s);
}

bool is_symmetric(const AnyState& s) {
  return std::visit([](const auto& st) { return std::decay_t<decltype(st)>::symmetric(); }, s);
}

namespace {

template <NodeTensor Ten>
AnyState converted_to(const TTNState<Ten>& st, Precision p) {
  auto fix = [](auto&& next) {
    next.reisometrize();
    next.normalize();
    return AnyState(std::move(next));
  };
  switch (p) {
    case Precision::S: return fix(st.template converted<float>());
    case Precision::C: return fix(st.template converted<cfloat>());
    case Precision::D: return fix(st.template converted<double>());
    case Precision::Z: return fix(st.template converted<cdouble>());
  }
  throw ArgumentError("unknown precision");
}

template <NodeTensor Ten>
TTNState<Ten> make_random(const IsingModelSpec& spec, const SweepConfig& config) {
  return random_state<Ten>(TTNTopology(spec.num_sites()), config.chi, config.seed, config.backend);
}

}  // namespace

AnyState convert_state(const AnyState& s, Precision p) {
  if (precision_of(s) == p) return s;
  return std::visit([&](const auto& st) { return converted_to(st, p); }, s);
}

AnyState initial_state(const IsingModelSpec& spec, const SweepConfig& config, Precision p) {
  spec.validate();
  config.validate();
  AnyState s = config.symmetric ? AnyState(make_random<Z2Tensor<double>>(spec, config))
                                : AnyState(make_random<DenseTensor<double>>(spec, config));
  return convert_state(s, p);
}

double expectation(const AnyState& s, const std::vector<PauliString>& terms) {
  return std::visit([&](const auto& st) { return expectation(st, terms); }, s);
}

SearchResult run_sweeps(AnyState state, const std::vector<PauliString>& terms, const SweepConfig& config,
                        const TelemetryCallback& telemetry) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SearchResult result;
  for (std::size_t i = 0; i < config.schedule.size(); ++i) {
    try {
      state = convert_state(state, config.schedule.at(i));
      std::visit(
          [&](auto& st) {
            using Ten = typename std::decay_t<decltype(st)>::tensor_type;
            st.set_backend(config.backend);
            Environment<Ten> env(st, terms);
            result.sweeps.push_back(sweep(st, env, config, i));
          },
          state);
    } catch (const Error& e) {
      throw SearchFailure(e.what(), result.sweeps);
    }
    if (telemetry) telemetry(result.sweeps.back());
  }
  try {
    result.final_energy = expectation(state, terms);
  } catch (const Error& e) {
    throw SearchFailure(e.what(), result.sweeps);
  }
  result.state = std::move(state);
  result.total_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

SearchResult find_ground_state(const IsingModelSpec& spec, const SweepConfig& config,
                               const TelemetryCallback& telemetry) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto terms = build_hamiltonian(spec, config.mapping);
  auto res = run_sweeps(initial_state(spec, config, config.schedule.at(0)), terms, config, telemetry);
  res.total_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::size_t estimate_peak_memory_bytes(const AnyState& s, std::size_t lanczos_max_iter) {
  return std::visit(
      [&](const auto& st) {
        using St = std::decay_t<decltype(st)>;
        const std::size_t b = bytes_per_scalar(St::precision());
        std::size_t state = 0, largest = 0, links = 0;
        for (const auto& t : st.tensors()) {
          const std::size_t n = ops::degrees_of_freedom(t);
          state += n;
          largest = std::max(largest, n);
          links = std::max(links, t.dim(kParent));
        }
        // Two environments per edge, each with a block and a handful of boundary operators.
        const std::size_t sites = st.topology().num_sites();
        std::size_t side = 1;
        while (side * side < sites) ++side;
        const std::size_t env = 2 * st.topology().num_nodes() * (1 + 2 * side) * links * links;
        return b * (state + env + (lanczos_max_iter + 3) * largest);
      },
      s);
}

// ---------------------------------------------------------------------------

void write_checkpoint(std::ostream& os, const AnyState& s, double energy) {
  std::visit(
      [&](const auto& st) {
        using St = std::decay_t<decltype(st)>;
        io::write_magic(os, "QTCK");
        io::write_le<std::uint16_t>(os, kCheckpointVersion);
        io::write_le<std::uint8_t>(os, St::symmetric() ? 1 : 0);
        io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(to_char(St::precision())));
        io::write_le<std::uint64_t>(os, st.topology().num_sites());
        io::write_le<std::uint64_t>(os, st.chi());
        io::write_le<std::uint64_t>(os, st.center());
        io::write_f64(os, energy);
        for (const auto& t : st.tensors()) {
          if constexpr (St::symmetric()) write_z2(os, t);
          else write_dense(os, t);
        }
      },
      s);
  if (!os) throw io::FormatError("failed to write checkpoint");
}

namespace {

template <NodeTensor Ten>
AnyState read_nodes(std::istream& is, const TTNTopology& topo, std::size_t chi, std::size_t center) {
  using T = typename Ten::value_type;
  std::vector<Ten> ts;
  for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
    if constexpr (is_z2_tensor_v<Ten>) ts.push_back(read_z2<T>(is));
    else ts.push_back(read_dense<T>(is));
  }
  return AnyState(TTNState<Ten>(topo, std::move(ts), center, chi, BackendId{}));
}

template <Scalar T>
AnyState read_family(std::istream& is, bool symmetric, const TTNTopology& topo, std::size_t chi, std::size_t center) {
  return symmetric ? read_nodes<Z2Tensor<T>>(is, topo, chi, center) : read_nodes<DenseTensor<T>>(is, topo, chi, center);
}

}  // namespace

std::pair<AnyState, double> read_checkpoint(std::istream& is) {
  io::expect_magic(is, "QTCK");
  if (io::read_le<std::uint16_t>(is) != kCheckpointVersion) throw io::FormatError("unsupported checkpoint version");
  const auto sym = io::read_le<std::uint8_t>(is);
  if (sym > 1) throw io::FormatError("bad symmetry flag");
  const Precision p = precision_from_char(static_cast<char>(io::read_le<std::uint8_t>(is)));
  const auto sites = io::read_le<std::uint64_t>(is);
  if (sites > (1ull << 20)) throw io::FormatError("implausible site count");
  const TTNTopology topo(sites);
  const auto chi = io::read_le<std::uint64_t>(is);
  const auto center = io::read_le<std::uint64_t>(is);
  const double energy = io::read_f64(is);
  switch (p) {
    case Precision::S: return {read_family<float>(is, sym, topo, chi, center), energy};
    case Precision::C: return {read_family<cfloat>(is, sym, topo, chi, center), energy};
    case Precision::D: return {read_family<double>(is, sym, topo, chi, center), energy};
    case Precision::Z: return {read_family<cdouble>(is, sym, topo, chi, center), energy};
  }
  throw io::FormatError("unknown precision");
}

}  // namespace qttn
