/*
 * Copyright 2026 the jdzsl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <jdzsl/attr_predict.hpp>
#include <jdzsl/data.hpp>
#include <jdzsl/eval.hpp>
#include <jdzsl/io.hpp>
#include <jdzsl/joint_dict.hpp>
#include <jdzsl/matrix.hpp>
#include <jdzsl/sparse_opt.hpp>
#include <jdzsl/synth.hpp>
#include <jdzsl/transductive.hpp>
#include <jdzsl/tsne.hpp>
