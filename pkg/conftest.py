import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "bcc_skeleton.settings")
django.setup()
