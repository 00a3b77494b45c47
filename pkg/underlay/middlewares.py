from taskiq import TaskiqMessage, TaskiqMiddleware, TaskiqResult

from .logging import get_logger

logger = get_logger(__name__)


class TrialMiddleware(TaskiqMiddleware):
    def _create_label(self, message: TaskiqMessage) -> str:
        if labels_str := ",".join(
            f"{k}={v}" for k, v in message.labels.items() if k != "task_name"
        ):
            return f"{message.task_name}[{labels_str}]"

        else:
            return message.task_name

    def pre_execute(self, message: TaskiqMessage) -> TaskiqMessage:
        # NOTE: Ensure we always have this, no matter what
        message.labels["task_name"] = message.task_name

        logger.debug(f"{self._create_label(message)} - Started")
        return message

    def post_execute(self, message: TaskiqMessage, result: TaskiqResult):
        msg = f"{self._create_label(message)} - {result.execution_time:.3f}s"
        if result.is_err:
            logger.error(msg)
        else:
            logger.success(msg)

    # NOTE: Unless stdout is ignored, error traceback appears in stdout, no need for `on_error`
