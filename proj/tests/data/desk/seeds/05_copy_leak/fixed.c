static ssize_t vhost_cfg_write(struct file *file, const char __user *ubuf,
			       size_t len, loff_t *ppos)
{
	struct vhost_cfg *cfg = file->private_data;
	char *kbuf;
	int ret;

	if (len > VHOST_CFG_MAX)
		return -EINVAL;

	kbuf = kmalloc(len + 1, GFP_KERNEL);
	if (!kbuf)
		return -ENOMEM;

	if (copy_from_user(kbuf, ubuf, len)) {
		kfree(kbuf);
		return -EFAULT;
	}

	kbuf[len] = '\0';
	ret = vhost_cfg_parse(cfg, kbuf);
	kfree(kbuf);

	return ret ? ret : len;
}
