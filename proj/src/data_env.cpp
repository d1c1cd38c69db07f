#include "ompcore/data_env.hpp"

namespace ompcore::detail {

std::shared_ptr<CopyChannel> active_copy_channel() {
  auto channel = current_record().copy_channel;
  if (!channel) throw std::logic_error("copyprivate used outside of a single construct");
  return channel;
}

void publish_payload(std::any payload) {
  auto channel = active_copy_channel();
  auto team = current_record().team;
  std::lock_guard lock(team->mutex());
  if (channel->published) throw std::logic_error("copyprivate values published twice for one single construct");
  channel->payload = std::move(payload);
  channel->published = true;
  team->signal().notify_all();
}

std::any collect_payload() {
  auto channel = active_copy_channel();
  auto team = current_record().team;
  std::unique_lock lock(team->mutex());
  team->signal().wait(lock, [&] { return channel->published || team->aborted(); });
  if (!channel->published) throw RegionAborted("copyprivate: the publishing member left the team");
  return channel->payload;
}

}  // namespace ompcore::detail
