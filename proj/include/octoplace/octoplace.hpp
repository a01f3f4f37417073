#pragma once

#include "octoplace/backends.hpp"
#include "octoplace/config.hpp"
#include "octoplace/error.hpp"
#include "octoplace/evaluation.hpp"
#include "octoplace/fixture_backend.hpp"
#include "octoplace/geometry.hpp"
#include "octoplace/http_backend.hpp"
#include "octoplace/image_io.hpp"
#include "octoplace/pipeline.hpp"
#include "octoplace/scene.hpp"
#include "octoplace/service.hpp"
