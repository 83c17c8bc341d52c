#include "verirefine/external_operator.hpp"

#include <regex>

#include "verirefine/process.hpp"
#include "verirefine/transcript.hpp"

namespace verirefine {

namespace {

bool text_only(OperatorKind k) {
  return k == OperatorKind::gen_skeleton || k == OperatorKind::plan || k == OperatorKind::replan ||
         k == OperatorKind::split_hint;
}

}  // namespace

std::string reply_text(const std::string& out) {
  if (auto block = last_fenced_block(out)) return *block;
  static const std::regex footer(R"(\s*tokens used\s*[0-9][0-9,]*\s*$)");
  auto text = std::regex_replace(out, footer, "");
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  return text;
}

OperatorResponse ExternalOperator::run(const OperatorRequest& request, OperatorContext& context) {
  const auto agent = std::string(agent_role(request.kind));
  const auto command = expand_command(options_.command, {{"kind", std::string(to_string(request.kind))},
                                                         {"agent", agent},
                                                         {"stage", request.stage},
                                                         {"task", request.task_id},
                                                         {"file", request.file}});
  const auto payload = request_json(request).dump();
  const auto proc = run_process(command, options_.cwd, payload, options_.timeout);
  if (!proc.launched) return OperatorResponse::failure("cannot launch operator: " + proc.err);

  OperatorResponse r;
  r.tokens_used = parse_token_footer(proc.out + "\n" + proc.err);
  if (context.transcripts) {
    const auto path = context.transcripts->write(request.stage, agent, request.task_id, request.file,
                                                 {proc.out, proc.err, r.tokens_used});
    r.transcript_ref = path.string();
  }
  if (proc.timed_out) {
    r.error = "operator timed out";
    return r;
  }
  if (proc.exit_code != 0) {
    r.error = "operator exited with status " + std::to_string(proc.exit_code);
    return r;
  }
  if (text_only(request.kind)) {
    r.ok = true;
    r.text = reply_text(proc.out);
    return r;
  }
  const auto block = last_fenced_block(proc.out);
  if (!block) {
    r.error = "reply has no fenced block";
    return r;
  }
  const auto range = request.edit_range ? request.edit_range : request.hole;
  if (!range) {
    r.error = "request has no edit range";
    return r;
  }
  r.ok = true;
  r.patch = replace_range(request.file, *range, *block, "external");
  return r;
}

}  // namespace verirefine
