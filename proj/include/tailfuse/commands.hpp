#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tailfuse {

/// Flat key = value configuration; file entries first, command-line
/// overrides on top. Unknown keys are rejected by the commands that
/// would otherwise silently ignore a typo.
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback = "") const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNoConvergence = 3;

int cmd_fit(const RunConfig& config, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& err);
int cmd_threshold(const RunConfig& config, std::ostream& err);
int cmd_graph(const RunConfig& config, std::ostream& err);
int cmd_return_level(const RunConfig& config, std::ostream& err);

}  // namespace tailfuse
