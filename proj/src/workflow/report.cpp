#include "romflow/workflow.hpp"

#include <fstream>

namespace romflow {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f.precision(17);
  return f;
}

void close_csv(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw IoError("failed writing " + path.string());
}

void verification_rows(std::ofstream& f, const char* name, const std::optional<double>& total,
                       const std::vector<double>& per_param, double gate) {
  if (!total) return;
  f << name << ",all," << *total << ',' << gate << ',' << (*total <= gate ? "pass" : "fail") << '\n';
  for (std::size_t i = 0; i < per_param.size(); ++i) {
    f << name << ",param_" << i << ',' << per_param[i] << ',' << gate << ',' << (per_param[i] <= gate ? "pass" : "fail")
      << '\n';
  }
}

}  // namespace

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  const auto report_path = dir / "report.csv";
  auto r = open_csv(report_path);
  r << "stage,wall_seconds,shape\n";
  for (const auto& s : report.stages) r << s.stage << ',' << s.wall_seconds << ',' << s.shape << '\n';
  close_csv(r, report_path);

  const auto ver_path = dir / "verification.csv";
  auto v = open_csv(ver_path);
  v << "check,scope,error,threshold,status\n";
  verification_rows(v, "verification1", report.verification1, report.verification1_per_param, report.gate1);
  verification_rows(v, "verification2", report.verification2, report.verification2_per_param, report.gate2);
  close_csv(v, ver_path);

  const auto sp_path = dir / "speedup.csv";
  auto s = open_csv(sp_path);
  s << "metric,value\n";
  if (report.rule_size > 0) {
    s << "n_elements," << report.n_elements << '\n';
    s << "rule_size," << report.rule_size << '\n';
    s << "element_ratio," << report.element_ratio() << '\n';
    if (report.hrom_element_evaluations > 0) {
      s << "rom_element_evaluations," << report.rom_element_evaluations << '\n';
      s << "hrom_element_evaluations," << report.hrom_element_evaluations << '\n';
      if (report.rom_element_evaluations > 0) {
        s << "assembly_ratio,"
          << static_cast<double>(report.rom_element_evaluations) / static_cast<double>(report.hrom_element_evaluations)
          << '\n';
      }
    }
    if (report.fom_seconds > 0.0 && report.hrom_seconds > 0.0) {
      s << "fom_seconds," << report.fom_seconds << '\n';
      s << "hrom_seconds," << report.hrom_seconds << '\n';
      s << "wall_clock_ratio," << report.fom_seconds / report.hrom_seconds << '\n';
    }
    s << "# A 46.2x wall-clock speedup at full industrial scale is not reproducible at desk scale;"
         " it is listed for context only.\n";
  }
  close_csv(s, sp_path);
}

}  // namespace romflow
