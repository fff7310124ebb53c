#pragma once

#include <functional>
#include <fstream>
#include <sstream>
#include <string>

#include "dnas/common/error.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace dnas::test_support
{
    inline nlohmann::json load_json(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open " + path);
        return nlohmann::json::parse(in);
    }

    inline const nlohmann::json &crypto_vectors()
    {
        static const nlohmann::json v = load_json(std::string(DNAS_TEST_DATA_DIR) + "/crypto_vectors.json");
        return v;
    }

    inline Errc error_code_of(const std::function<void()> &fn)
    {
        try
        {
            fn();
        }
        catch (const Error &e)
        {
            return e.code();
        }
        ADD_FAILURE() << "expected dnas::Error";
        return Errc::InvalidArgument;
    }
} // namespace dnas::test_support
