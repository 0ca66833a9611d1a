#pragma once

#include <filesystem>
#include <string>

#include "factcause/pipeline.hpp"

inline factcause::RunConfig fixture_config() {
    const std::filesystem::path dir = std::filesystem::path(FACTCAUSE_TEST_DATA) / "fixture";
    factcause::RunConfig c;
    c.corpus = (dir / "corpus.txt").string();
    c.kb = (dir / "kb.jsonl").string();
    c.patterns = (dir / "patterns.jsonl").string();
    return c;
}
