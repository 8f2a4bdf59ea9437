static int usb_alloc_port_devices(struct usb_hub *hub, int nports)
{
	struct usb_port *port_dev;
	int i, retval;

	for (i = 0; i < nports; i++) {
		port_dev = kzalloc(sizeof(*port_dev), GFP_KERNEL);
		if (!port_dev)
			return -ENOMEM;

		port_dev->portnum = i + 1;
		port_dev->dev.parent = hub->intfdev;
		port_dev->dev.groups = port_dev_group;
		port_dev->dev.type = &usb_port_device_type;
		dev_set_name(&port_dev->dev, "port%d", i + 1);
		mutex_init(&port_dev->status_lock);

		retval = device_register(&port_dev->dev);
		if (retval) {
			put_device(&port_dev->dev);
			return retval;
		}
		hub->ports[i] = port_dev;
	}

	return 0;
}

int usb_string_copy(struct usb_device *dev, int index, char *buf, size_t size)
{
	unsigned char *tbuf;
	int err;

	if (dev->state == USB_STATE_SUSPENDED)
		return -EHOSTUNREACH;
	if (size <= 0 || !buf)
		return -EINVAL;
	buf[0] = 0;
	if (index <= 0 || index >= 256)
		return -EINVAL;
	tbuf = kmalloc(256, GFP_NOIO);
	if (!tbuf)
		return -ENOMEM;

	err = usb_get_langid(dev, tbuf);
	if (err < 0)
		goto errout;

	err = usb_string_sub(dev, dev->string_langid, index, tbuf);
	if (err < 0)
		goto errout;

	size--;
	err = utf16s_to_utf8s((wchar_t *) &tbuf[2], (err - 2) / 2,
			UTF16_LITTLE_ENDIAN, buf, size);
	buf[err] = 0;

errout:
	kfree(tbuf);
	return err;
}

static void usb_release_dev(struct device *dev)
{
	struct usb_device *udev;
	struct usb_hcd *hcd;

	udev = to_usb_device(dev);
	hcd = bus_to_hcd(udev->bus);

	usb_destroy_configuration(udev);
	usb_release_bos_descriptor(udev);
	of_node_put(dev->of_node);
	usb_put_hcd(hcd);
	kfree(udev->product);
	kfree(udev->manufacturer);
	kfree(udev->serial);
	kfree(udev);
}

static int usb_hub_set_port_power(struct usb_device *hdev, struct usb_hub *hub,
				  int port1, bool set)
{
	int ret;

	if (set)
		ret = set_port_feature(hdev, port1, USB_PORT_FEAT_POWER);
	else
		ret = usb_clear_port_feature(hdev, port1, USB_PORT_FEAT_POWER);

	if (ret)
		return ret;

	if (set)
		set_bit(port1, hub->power_bits);
	else
		clear_bit(port1, hub->power_bits);
	return 0;
}
