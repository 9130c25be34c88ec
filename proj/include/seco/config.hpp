#pragma once

#include <map>
#include <string>

#include "seco/dataset.hpp"
#include "seco/evaluation.hpp"
#include "seco/trainer.hpp"

namespace seco {

// Flat `key = value` configuration with `#` comments. Keys are namespaced
// (gen.*, train.*, probe.*); every key has a documented default and unknown
// keys are errors, never silently ignored. An empty file is valid.
class KeyValueConfig {
public:
    KeyValueConfig();  // all defaults

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;

    GenConfig gen_config() const;
    TrainConfig train_config() const;
    ProbeConfig probe_config() const;

    // Resolved configuration (defaults with overrides applied), one
    // `key = value` line per known key, in registry order.
    std::string render() const;

private:
    void parse_line(const std::string& line, const std::string& where, std::size_t line_no);
    std::map<std::string, std::string> values_;
};

}  // namespace seco
