from geodl.task.stream import TaskStream, TaskData, RealizedStream, make_task_stream, standardize_stream, realize_stream
