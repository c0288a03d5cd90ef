// Copyright 2026 The mlmattack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLMATTACK_TORCHSCRIPT_BACKEND_H_
#define MLMATTACK_TORCHSCRIPT_BACKEND_H_

#include <memory>

#include "mlmattack/bundle.h"
#include "mlmattack/gateway.h"

namespace mlmattack {

// In-process backends over TorchScript graphs. Graph signatures:
//
//   classifier: forward(input_ids, attention_mask, token_type_ids) -> [1, C]
//   mlm:        forward(input_ids, attention_mask) -> [1, L, V] logits
//   encoder:    forward(input_ids, attention_mask) -> [1, D]
//
// All inputs are int64 tensors of shape [1, L] starting with [CLS].
// Load failures raise BackendUnavailable.
std::shared_ptr<ClassifierBackend> LoadTorchScriptClassifier(const ModelBundle& bundle);
std::shared_ptr<MlmBackend> LoadTorchScriptMlm(const ModelBundle& bundle);
std::shared_ptr<EncoderBackend> LoadTorchScriptEncoder(const ModelBundle& bundle);

}  // namespace mlmattack

#endif  // MLMATTACK_TORCHSCRIPT_BACKEND_H_
