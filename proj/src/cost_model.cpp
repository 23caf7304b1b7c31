#include "basisbreak/cost_model.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "basisbreak/errors.hpp"

namespace bb {

void HardwareProfile::validate() const {
  if (!(bw_tee > 0) || !(flops_cpu > 0) || !(m_tee > 0) || !(t_budget > 0)) {
    throw ConfigError("hardware profile fields must be strictly positive");
  }
}

const std::vector<ModelShape>& model_zoo() {
  static const std::vector<ModelShape> zoo = {
      {"LLaMA-3 8B", 14336, 4096, 32, 4},
      {"Gemma 3 27B", 21504, 5376, 62, 4},
      {"LLaMA-3 70B", 28672, 8192, 80, 4},
      {"Mistral Large 2", 28672, 12288, 88, 4},
      {"LLaMA-3.1 405B", 53248, 16384, 126, 4},
  };
  return zoo;
}

const ModelShape& find_model(const std::string& name) {
  for (const auto& s : model_zoo()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown model: " + name);
}

double calibrate_flops(const ModelShape& shape, double compute_seconds) {
  if (!(compute_seconds > 0)) throw ConfigError("compute time must be positive");
  return 2.0 * static_cast<double>(shape.d_in) *
         static_cast<double>(shape.d_out) / compute_seconds;
}

HardwareProfile calibrated_profile(double m_tee_bytes) {
  HardwareProfile hw;
  hw.flops_cpu = calibrate_flops(model_zoo().front(), 0.070);
  hw.m_tee = m_tee_bytes;
  return hw;
}

double t_fly(const ModelShape& shape, const HardwareProfile& hw) {
  hw.validate();
  const double elems =
      static_cast<double>(shape.d_in) * static_cast<double>(shape.d_out);
  return (static_cast<double>(shape.s_dtype) / hw.bw_tee +
          2.0 / hw.flops_cpu) *
         elems;
}

double t_fly_compute(const ModelShape& shape, const HardwareProfile& hw) {
  hw.validate();
  return 2.0 * static_cast<double>(shape.d_in) *
         static_cast<double>(shape.d_out) / hw.flops_cpu;
}

double t_pre(const ModelShape& shape, const HardwareProfile& hw,
             std::uint64_t k) {
  hw.validate();
  return 2.0 * static_cast<double>(k) *
         static_cast<double>(shape.d_in + shape.d_out) / hw.flops_cpu;
}

MemFootprints mem_footprints(const ModelShape& shape, std::uint64_t k) {
  MemFootprints f;
  f.mem_fly = shape.d_in * shape.d_out * shape.s_dtype;
  f.mem_pre = k * (shape.d_in + shape.d_out) * shape.s_dtype;
  f.ratio = f.mem_pre == 0 ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(f.mem_fly) /
                                 static_cast<double>(f.mem_pre);
  return f;
}

KBounds k_max(const ModelShape& shape, const HardwareProfile& hw) {
  hw.validate();
  const double width = static_cast<double>(shape.d_in + shape.d_out);
  if (width == 0 || shape.layers == 0 || shape.s_dtype == 0) {
    throw ConfigError("model shape must have positive dims");
  }
  KBounds b;
  b.k0 = static_cast<std::uint64_t>(std::floor(
      hw.m_tee / (static_cast<double>(shape.layers) * width *
                  static_cast<double>(shape.s_dtype))));
  b.k1 = static_cast<std::uint64_t>(
      std::floor(hw.t_budget * hw.flops_cpu / (2.0 * width)));
  b.k_max = std::min(b.k0, b.k1);
  return b;
}

std::string format_table_bytes(std::uint64_t bytes) {
  std::ostringstream os;
  const double b = static_cast<double>(bytes);
  if (b < kGiB) {
    os << std::llround(b / kMiB) << " MB";
  } else {
    os << std::fixed << std::setprecision(2) << b / kGiB << " GB";
  }
  return os.str();
}

std::string cost_table_text(const std::vector<ModelShape>& zoo,
                            const HardwareProfile& hw, std::uint64_t k) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "model" << std::right << std::setw(8)
     << "d_in" << std::setw(8) << "d_out" << std::setw(5) << "L"
     << std::setw(11) << "W3 mem" << std::setw(11) << "pre mem"
     << std::setw(9) << "ratio" << std::setw(11) << "t_fly ms"
     << std::setw(11) << "t_pre ms" << std::setw(6) << "K0" << std::setw(8)
     << "K1" << std::setw(7) << "Kmax" << '\n';
  for (const auto& s : zoo) {
    const MemFootprints f = mem_footprints(s, k);
    const KBounds kb = k_max(s, hw);
    std::ostringstream pre;
    pre << std::fixed << std::setprecision(2)
        << static_cast<double>(f.mem_pre) / kMiB << " MB";
    os << std::left << std::setw(18) << s.name << std::right << std::setw(8)
       << s.d_in << std::setw(8) << s.d_out << std::setw(5) << s.layers
       << std::setw(11) << format_table_bytes(f.mem_fly) << std::setw(11)
       << pre.str() << std::setw(9) << std::fixed << std::setprecision(1)
       << f.ratio << std::setw(11) << std::setprecision(2)
       << t_fly(s, hw) * 1e3 << std::setw(11) << std::setprecision(4)
       << t_pre(s, hw, k) * 1e3 << std::setw(6) << kb.k0 << std::setw(8)
       << kb.k1 << std::setw(7)
       << (kb.feasible() ? std::to_string(kb.k_max) : std::string("infeas"))
       << '\n';
  }
  return os.str();
}

std::string cost_table_csv(const std::vector<ModelShape>& zoo,
                           const HardwareProfile& hw, std::uint64_t k) {
  std::ostringstream os;
  os << "model,d_in,d_out,layers,s_dtype,k,mem_fly_bytes,mem_fly_table,"
        "mem_pre_bytes,ratio,t_fly_s,t_fly_compute_s,t_pre_s,k0,k1,k_max,"
        "feasible\n";
  os << std::setprecision(10);
  for (const auto& s : zoo) {
    const MemFootprints f = mem_footprints(s, k);
    const KBounds kb = k_max(s, hw);
    os << s.name << ',' << s.d_in << ',' << s.d_out << ',' << s.layers << ','
       << s.s_dtype << ',' << k << ',' << f.mem_fly << ','
       << format_table_bytes(f.mem_fly) << ',' << f.mem_pre << ',' << f.ratio
       << ',' << t_fly(s, hw) << ',' << t_fly_compute(s, hw) << ','
       << t_pre(s, hw, k) << ',' << kb.k0 << ',' << kb.k1 << ',' << kb.k_max
       << ',' << (kb.feasible() ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace bb
