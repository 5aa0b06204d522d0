import os
from celery import Celery

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "bcc_skeleton.settings")

app = Celery("bcc_skeleton")

# Every Django setting prefixed with CELERY_ configures the worker.
app.config_from_object("django.conf:settings", namespace="CELERY")

# Picks up montecarlo.tasks (trial chunks)
app.autodiscover_tasks()
